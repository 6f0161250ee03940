// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_member, FeatureScaler, Hyperparameters, Member, MemberKind};
use crate::config::{AnalysisConfig, RadarConfig, ScoringConfig};
use crate::error::{RadarError, Result};
use crate::features::{check_feature_names, FeatureVector, FEATURE_NAMES, NUM_FEATURES};
use crate::jsonfmt;
use crate::scoring::{score_all, ScoreSet};
use crate::trace::Label;

pub const MODEL_VERSION: u32 = 1;
pub const MODEL_SUFFIX: &str = ".radar-model.json";

/// Result of the hard-vote rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub label: Label,
    pub mean_vote: f64,
    pub mean_probability: f64,
    pub confidence: f64,
}

/// Recall iff strictly more than half the members vote recall, so an even
/// split goes to reasoning. Confidence is the mean recall probability for a
/// recall label and its complement otherwise.
pub fn aggregate_votes(votes: &[bool], probabilities: &[f64]) -> Aggregate {
    assert_eq!(votes.len(), probabilities.len(), "one probability per vote");
    assert!(!votes.is_empty(), "at least one member");
    let m = votes.len() as f64;
    let mean_vote = votes.iter().filter(|&&v| v).count() as f64 / m;
    let mean_probability = probabilities.iter().sum::<f64>() / m;
    let label = Label::from_recall(mean_vote > 0.5);
    let confidence = if label.is_recall() {
        mean_probability
    } else {
        1.0 - mean_probability
    };
    Aggregate {
        label,
        mean_vote,
        mean_probability,
        confidence,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberOutput {
    pub kind: MemberKind,
    pub vote: Label,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub label: Label,
    pub confidence: f64,
    pub mean_probability: f64,
    pub members: Vec<MemberOutput>,
    pub scores: ScoreSet,
}

/// Scaler plus the four trained members, with everything needed to
/// reproduce and audit the training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub radar_model_version: u32,
    pub feature_names: Vec<String>,
    pub scaler: FeatureScaler,
    pub members: Vec<Member>,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
    pub analysis: AnalysisConfig,
    pub scoring: ScoringConfig,
}

impl EnsembleModel {
    /// Fits the scaler, then trains the four members concurrently on
    /// independent seeded streams.
    pub fn train(rows: &[FeatureVector], labels: &[Label], config: &RadarConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if rows.len() != labels.len() {
            return Err(RadarError::InvalidInput(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let raw: Vec<Vec<f64>> = rows.iter().map(|r| r.0.to_vec()).collect();
        let y: Vec<bool> = labels.iter().map(|l| l.is_recall()).collect();
        super::check_training_set(&raw, &y)?;
        let scaler = FeatureScaler::fit(&raw)?;
        let scaled = raw.iter().map(|r| scaler.transform(r)).collect::<Result<Vec<_>>>()?;
        let members = MemberKind::ALL
            .par_iter()
            .map(|&kind| train_member(kind, &scaled, &y, &config.classifier, seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(EnsembleModel {
            radar_model_version: MODEL_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            scaler,
            members,
            seed,
            hyperparameters: config.classifier.clone(),
            analysis: config.analysis.clone(),
            scoring: config.scoring.clone(),
        })
    }

    /// Structural checks run after loading and before predicting.
    pub fn validate(&self) -> Result<()> {
        if self.radar_model_version != MODEL_VERSION {
            return Err(RadarError::Malformed(format!(
                "unsupported model version {}",
                self.radar_model_version
            )));
        }
        check_feature_names(&self.feature_names)?;
        if self.scaler.mean.len() != NUM_FEATURES || self.scaler.std.len() != NUM_FEATURES {
            return Err(RadarError::Malformed("scaler must have 37 columns".into()));
        }
        let kinds: Vec<MemberKind> = self.members.iter().map(Member::kind).collect();
        if kinds != MemberKind::ALL {
            return Err(RadarError::Malformed(format!(
                "untrained or incomplete model: members {kinds:?}, expected {:?}",
                MemberKind::ALL
            )));
        }
        if let Some(m) = self.members.iter().find(|m| m.num_features() != NUM_FEATURES) {
            return Err(RadarError::Malformed(format!(
                "{} was trained on {} features",
                m.kind().as_str(),
                m.num_features()
            )));
        }
        Ok(())
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<PredictionResult> {
        self.validate()?;
        features.check_finite()?;
        let x = self.scaler.transform(&features.0)?;
        let mut votes = Vec::with_capacity(self.members.len());
        let mut probs = Vec::with_capacity(self.members.len());
        let mut members = Vec::with_capacity(self.members.len());
        for m in &self.members {
            let vote = m.predict_label(&x)?;
            let probability = m.predict_proba(&x)?;
            votes.push(vote);
            probs.push(probability);
            members.push(MemberOutput {
                kind: m.kind(),
                vote: Label::from_recall(vote),
                probability,
            });
        }
        let agg = aggregate_votes(&votes, &probs);
        Ok(PredictionResult {
            label: agg.label,
            confidence: agg.confidence,
            mean_probability: agg.mean_probability,
            members,
            scores: score_all(features, &self.scoring)?,
        })
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(jsonfmt::to_vec_pretty(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_slice(bytes);
        de.disable_recursion_limit();
        let model = EnsembleModel::deserialize(&mut de)?;
        de.end()?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| RadarError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| RadarError::io(path, e))?;
        Self::from_json(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unanimous_recall() {
        let a = aggregate_votes(&[true; 4], &[0.9, 0.8, 0.7, 0.6]);
        assert_eq!(a.label, Label::Recall);
        assert!((a.mean_probability - 0.75).abs() < 1e-15);
        assert_eq!(a.confidence, a.mean_probability);
    }

    #[test]
    fn even_split_goes_to_reasoning() {
        let a = aggregate_votes(&[true, true, false, false], &[0.6, 0.6, 0.4, 0.4]);
        assert_eq!(a.mean_vote, 0.5);
        assert_eq!(a.label, Label::Reasoning);
        assert!((a.confidence - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unanimous_reasoning() {
        let a = aggregate_votes(&[false; 4], &[0.1, 0.2, 0.1, 0.2]);
        assert_eq!(a.label, Label::Reasoning);
        assert!((a.mean_probability - 0.15).abs() < 1e-15);
        assert!((a.confidence - 0.85).abs() < 1e-15);
    }

    #[test]
    fn incomplete_model_refuses_to_predict() {
        let model = EnsembleModel {
            radar_model_version: MODEL_VERSION,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            scaler: FeatureScaler {
                mean: vec![0.0; NUM_FEATURES],
                std: vec![1.0; NUM_FEATURES],
            },
            members: vec![],
            seed: 0,
            hyperparameters: Hyperparameters::default(),
            analysis: AnalysisConfig::default(),
            scoring: ScoringConfig::default(),
        };
        let err = model.predict(&FeatureVector([0.0; NUM_FEATURES])).unwrap_err();
        assert!(err.to_string().contains("untrained"), "{err}");
    }
}
