// SPDX-License-Identifier: MIT OR Apache-2.0

//! Surface features: statistics of the layer-wise confidence and entropy
//! trajectories.
//!
//! Standard deviations use the `L - 1` divisor and are 0 for a single layer.
//! Layer indices are 0-based; the regression slope does not depend on the
//! index origin.

use serde::{Deserialize, Serialize};

use crate::error::{RadarError, Result};
use crate::stats::{mean, sample_std};
use crate::trace::ActivationTrace;

/// Tolerance on `sum(p) = 1` accepted by [`shannon_entropy`].
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFeatures {
    pub mean_confidence: f64,
    pub std_confidence: f64,
    pub max_confidence: f64,
    pub min_confidence: f64,
    pub confidence_range: f64,
    pub convergence_layer: usize,
    pub convergence_speed: f64,
    pub confidence_slope: f64,
    pub oscillation_count: usize,
    pub early_confidence: f64,
    pub late_confidence: f64,
    pub prediction_stability: f64,
    pub mean_entropy: f64,
    pub entropy_change: f64,
    pub information_gain: f64,
    pub layer_consistency: f64,
}

impl SurfaceFeatures {
    pub const NAMES: [&'static str; 16] = [
        "mean_confidence",
        "std_confidence",
        "max_confidence",
        "min_confidence",
        "confidence_range",
        "convergence_layer",
        "convergence_speed",
        "confidence_slope",
        "oscillation_count",
        "early_confidence",
        "late_confidence",
        "prediction_stability",
        "mean_entropy",
        "entropy_change",
        "information_gain",
        "layer_consistency",
    ];

    /// Values in canonical order, matching [`Self::NAMES`].
    pub fn to_array(&self) -> [f64; 16] {
        [
            self.mean_confidence,
            self.std_confidence,
            self.max_confidence,
            self.min_confidence,
            self.confidence_range,
            self.convergence_layer as f64,
            self.convergence_speed,
            self.confidence_slope,
            self.oscillation_count as f64,
            self.early_confidence,
            self.late_confidence,
            self.prediction_stability,
            self.mean_entropy,
            self.entropy_change,
            self.information_gain,
            self.layer_consistency,
        ]
    }
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if !pi.is_finite() || pi < 0.0 {
            return Err(RadarError::InvalidInput(format!(
                "probability {i} is {pi}, expected a nonnegative finite value"
            )));
        }
        sum += pi;
    }
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(RadarError::InvalidInput(format!(
            "probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(entropy_unchecked(p))
}

pub(crate) fn entropy_unchecked(p: &[f64]) -> f64 {
    -crate::stats::compensated_sum(p.iter().filter(|&&pi| pi > 0.0).map(|&pi| pi * pi.ln()))
}

/// Least-squares slope of `y` against indices `0..n`.
pub fn linear_slope(y: &[f64]) -> Result<f64> {
    let n = y.len();
    if n < 2 {
        return Err(RadarError::InvalidInput(format!(
            "slope needs at least 2 points, got {n}"
        )));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Ok(0.0);
    }
    let x_mean = (n - 1) as f64 / 2.0;
    let y_mean = mean(y);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &yi) in y.iter().enumerate() {
        let dx = i as f64 - x_mean;
        num += dx * (yi - y_mean);
        den += dx * dx;
    }
    Ok(num / den)
}

/// Slope that degrades to 0 for a single point.
pub(crate) fn slope_or_zero(y: &[f64]) -> f64 {
    linear_slope(y).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceStats {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub range: f64,
    /// Earliest layer attaining the maximum.
    pub convergence_layer: usize,
    pub convergence_speed: f64,
    pub slope: f64,
}

fn check_trajectory(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(RadarError::Empty(format!("{name} trajectory")));
    }
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(RadarError::InvalidInput(format!("{name} at layer {i} is not finite")));
    }
    Ok(())
}

pub fn confidence_features(c: &[f64]) -> Result<ConfidenceStats> {
    check_trajectory("confidence", c)?;
    if let Some(i) = c.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(RadarError::InvalidInput(format!(
            "confidence at layer {i} is {}, outside [0, 1]",
            c[i]
        )));
    }
    let mut argmax = 0;
    for (i, &v) in c.iter().enumerate() {
        if v > c[argmax] {
            argmax = i;
        }
    }
    let max = c[argmax];
    let min = c.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConfidenceStats {
        mean: mean(c),
        std: sample_std(c),
        max,
        min,
        range: max - min,
        convergence_layer: argmax,
        convergence_speed: 1.0 / (argmax as f64 + 1.0),
        slope: slope_or_zero(c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryDynamics {
    pub oscillation_count: usize,
    pub early_confidence: f64,
    pub late_confidence: f64,
    pub prediction_stability: f64,
}

pub fn trajectory_dynamics(c: &[f64]) -> Result<TrajectoryDynamics> {
    check_trajectory("confidence", c)?;
    let deltas: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    // a zero product (flat step) is not a sign change
    let oscillation_count = deltas.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    let half = c.len() / 2;
    let early_confidence = if half == 0 { c[0] } else { mean(&c[..half]) };
    Ok(TrajectoryDynamics {
        oscillation_count,
        early_confidence,
        late_confidence: mean(&c[half..]),
        prediction_stability: 1.0 - sample_std(c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationFeatures {
    pub mean_entropy: f64,
    pub entropy_change: f64,
    pub information_gain: f64,
    pub layer_consistency: f64,
}

pub fn information_features(h: &[f64]) -> Result<InformationFeatures> {
    check_trajectory("entropy", h)?;
    let entropy_change = h[h.len() - 1] - h[0];
    Ok(InformationFeatures {
        mean_entropy: mean(h),
        entropy_change,
        information_gain: -entropy_change,
        layer_consistency: 1.0 - sample_std(h),
    })
}

/// Computes all 16 surface features of a trace.
pub fn extract_surface_features(trace: &ActivationTrace) -> Result<SurfaceFeatures> {
    let c = confidence_features(&trace.confidence)?;
    let d = trajectory_dynamics(&trace.confidence)?;
    let i = information_features(&trace.entropy)?;
    Ok(SurfaceFeatures {
        mean_confidence: c.mean,
        std_confidence: c.std,
        max_confidence: c.max,
        min_confidence: c.min,
        confidence_range: c.range,
        convergence_layer: c.convergence_layer,
        convergence_speed: c.convergence_speed,
        confidence_slope: c.slope,
        oscillation_count: d.oscillation_count,
        early_confidence: d.early_confidence,
        late_confidence: d.late_confidence,
        prediction_stability: d.prediction_stability,
        mean_entropy: i.mean_entropy,
        entropy_change: i.entropy_change,
        information_gain: i.information_gain,
        layer_consistency: i.layer_consistency,
    })
}
