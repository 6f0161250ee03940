// SPDX-License-Identifier: MIT OR Apache-2.0

//! Tunable constants for feature extraction, scoring and training.
//!
//! Every section deserializes with defaults for missing keys, so a config
//! file only needs to name the values it overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::Hyperparameters;
use crate::error::{RadarError, Result};

/// Thresholds and normalization constants used by the feature extractors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Heads with attention entropy strictly below this count as specialized.
    pub specialization_threshold: f64,
    /// Divisor for head specialization score and reasoning head activation.
    pub entropy_norm: f64,
    /// Divisor for ablation robustness.
    pub robustness_norm: f64,
    /// Divisor turning per-layer attention entropy into a causal-effect proxy.
    pub attribution_norm: f64,
    /// Added to the mean attention entropy before inversion.
    pub epsilon: f64,
    /// Singular values above `rank_threshold * sigma_max` count toward effective rank.
    pub rank_threshold: f64,
    /// Allowed deviation of an attention row sum from 1.
    pub attention_row_tolerance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            specialization_threshold: 1.5,
            entropy_norm: 3.0,
            robustness_norm: 5.0,
            attribution_norm: 10.0,
            epsilon: 1e-8,
            rank_threshold: 0.01,
            attention_row_tolerance: 1e-3,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("specialization_threshold", self.specialization_threshold),
            ("entropy_norm", self.entropy_norm),
            ("robustness_norm", self.robustness_norm),
            ("attribution_norm", self.attribution_norm),
            ("epsilon", self.epsilon),
            ("rank_threshold", self.rank_threshold),
            ("attention_row_tolerance", self.attention_row_tolerance),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(RadarError::Config(format!(
                    "analysis.{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Component weights for the four interpretive scores.
///
/// Each score is the weighted mean of its bounded components; equal weights
/// give the plain average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    /// Depth at which the path-length component of the circuit score reaches 0.5.
    pub reference_depth: f64,
    pub rds_weights: [f64; 4],
    pub rci_weights: [f64; 4],
    pub mechanistic_weights: [f64; 4],
    pub circuit_weights: [f64; 3],
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            reference_depth: 24.0,
            rds_weights: [1.0; 4],
            rci_weights: [1.0; 4],
            mechanistic_weights: [1.0; 4],
            circuit_weights: [1.0; 3],
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reference_depth.is_finite() && self.reference_depth > 0.0) {
            return Err(RadarError::Config("scoring.reference_depth must be positive".into()));
        }
        let groups: [(&str, &[f64]); 4] = [
            ("rds_weights", &self.rds_weights),
            ("rci_weights", &self.rci_weights),
            ("mechanistic_weights", &self.mechanistic_weights),
            ("circuit_weights", &self.circuit_weights),
        ];
        for (name, weights) in groups {
            if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
                return Err(RadarError::Config(format!(
                    "scoring.{name} must be nonnegative with a positive sum"
                )));
            }
        }
        Ok(())
    }
}

/// Everything a config file can set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarConfig {
    pub analysis: AnalysisConfig,
    pub scoring: ScoringConfig,
    pub classifier: Hyperparameters,
}

impl RadarConfig {
    /// Loads a TOML config file; JSON is accepted when the suffix is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RadarError::io(path, e))?;
        let config: RadarConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| RadarError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| RadarError::Config(format!("{}: {e}", path.display())))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        self.scoring.validate()?;
        self.classifier.validate()
    }
}
