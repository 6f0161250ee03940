// SPDX-License-Identifier: MIT OR Apache-2.0

//! Bounded interpretive scores that complement the binary label.
//!
//! Each score is a weighted mean of components mapped into `[0, 1]`:
//! bounded features are clamped, unbounded nonnegative ones go through
//! `x / (1 + x)`. With the default equal weights:
//!
//! | score | components |
//! |---|---|
//! | recall detection (RDS) | convergence speed, early confidence, head specialization, ablation robustness |
//! | reasoning complexity (RCI) | reasoning head activation, `1 - convergence speed`, flow variance, \|circuit complexity\| |
//! | mechanistic | direct attribution, indirect effect, mediation, intervention sensitivity |
//! | circuit | \|circuit complexity\|, flow variance, path length / reference depth |

use serde::{Deserialize, Serialize};

use crate::config::ScoringConfig;
use crate::error::{RadarError, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub rds: f64,
    pub rci: f64,
    pub mechanistic: f64,
    pub circuit: f64,
}

/// `x / (1 + x)` for `x >= 0`.
pub fn squash(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(RadarError::InvalidInput(format!(
            "squash needs a nonnegative input, got {x}"
        )));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(x / (1.0 + x))
}

fn sq(x: f64) -> f64 {
    let x = x.max(0.0);
    x / (1.0 + x)
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn weighted(components: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    clamp01(components.iter().zip(weights).map(|(c, w)| c * w).sum::<f64>() / total)
}

pub fn recall_detection_score(f: &FeatureVector, config: &ScoringConfig) -> Result<f64> {
    f.check_finite()?;
    Ok(weighted(
        &[
            clamp01(f.get("convergence_speed")),
            clamp01(f.get("early_confidence")),
            clamp01(f.get("head_specialization_score")),
            clamp01(f.get("ablation_robustness")),
        ],
        &config.rds_weights,
    ))
}

pub fn reasoning_complexity_index(f: &FeatureVector, config: &ScoringConfig) -> Result<f64> {
    f.check_finite()?;
    Ok(weighted(
        &[
            clamp01(f.get("reasoning_head_activation")),
            clamp01(1.0 - f.get("convergence_speed")),
            sq(f.get("activation_flow_variance")),
            sq(f.get("circuit_complexity").abs()),
        ],
        &config.rci_weights,
    ))
}

pub fn mechanistic_score(f: &FeatureVector, config: &ScoringConfig) -> Result<f64> {
    f.check_finite()?;
    Ok(weighted(
        &[
            sq(f.get("direct_logit_attribution")),
            sq(f.get("indirect_effect_strength")),
            sq(f.get("causal_mediation_score")),
            clamp01(f.get("intervention_sensitivity")),
        ],
        &config.mechanistic_weights,
    ))
}

pub fn circuit_complexity_score(f: &FeatureVector, config: &ScoringConfig) -> Result<f64> {
    f.check_finite()?;
    Ok(weighted(
        &[
            sq(f.get("circuit_complexity").abs()),
            sq(f.get("activation_flow_variance")),
            sq(f.get("causal_path_length") / config.reference_depth),
        ],
        &config.circuit_weights,
    ))
}

pub fn score_all(f: &FeatureVector, config: &ScoringConfig) -> Result<ScoreSet> {
    Ok(ScoreSet {
        rds: recall_detection_score(f, config)?,
        rci: reasoning_complexity_index(f, config)?,
        mechanistic: mechanistic_score(f, config)?,
        circuit: circuit_complexity_score(f, config)?,
    })
}
