// SPDX-License-Identifier: MIT OR Apache-2.0

//! Standardization, the four ensemble members, hard-vote aggregation and
//! cross-validation.
//!
//! Labels are booleans inside this module: `true` is recall, the positive
//! class whose probability every member reports.

mod boosting;
mod cv;
mod ensemble;
mod forest;
mod logistic;
pub mod rng;
mod scaler;
mod svm;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{RadarError, Result};

pub use boosting::{BoostingParams, GradientBoosting};
pub use cv::{kfold_cv, stratified_folds, CvReport};
pub use ensemble::{
    aggregate_votes, Aggregate, EnsembleModel, MemberOutput, PredictionResult, MODEL_SUFFIX, MODEL_VERSION,
};
pub use forest::{ForestParams, RandomForest};
pub use logistic::{LogisticParams, LogisticRegression};
pub use scaler::FeatureScaler;
pub use svm::{LinearSvm, PlattScaling, SvmParams};
pub use tree::Node;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    RandomForest,
    GradientBoosting,
    Svm,
    LogisticRegression,
}

impl MemberKind {
    /// Ensemble order, also used to derive per-member RNG streams.
    pub const ALL: [MemberKind; 4] = [
        MemberKind::RandomForest,
        MemberKind::GradientBoosting,
        MemberKind::Svm,
        MemberKind::LogisticRegression,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MemberKind::RandomForest => "random_forest",
            MemberKind::GradientBoosting => "gradient_boosting",
            MemberKind::Svm => "svm",
            MemberKind::LogisticRegression => "logistic_regression",
        }
    }

    fn stream(self) -> u64 {
        match self {
            MemberKind::RandomForest => 1,
            MemberKind::GradientBoosting => 2,
            MemberKind::Svm => 3,
            MemberKind::LogisticRegression => 4,
        }
    }
}

/// Hyperparameters of all four members.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub random_forest: ForestParams,
    pub gradient_boosting: BoostingParams,
    pub svm: SvmParams,
    pub logistic_regression: LogisticParams,
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        self.random_forest.validate()?;
        self.gradient_boosting.validate()?;
        self.svm.validate()?;
        self.logistic_regression.validate()
    }
}

/// A trained ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Member {
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    Svm(LinearSvm),
    LogisticRegression(LogisticRegression),
}

impl Member {
    pub fn kind(&self) -> MemberKind {
        match self {
            Member::RandomForest(_) => MemberKind::RandomForest,
            Member::GradientBoosting(_) => MemberKind::GradientBoosting,
            Member::Svm(_) => MemberKind::Svm,
            Member::LogisticRegression(_) => MemberKind::LogisticRegression,
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            Member::RandomForest(m) => m.num_features,
            Member::GradientBoosting(m) => m.num_features,
            Member::Svm(m) => m.weights.len(),
            Member::LogisticRegression(m) => m.weights.len(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_features() {
            return Err(RadarError::FeatureMismatch(format!(
                "{} expects {} features, got {}",
                self.kind().as_str(),
                self.num_features(),
                x.len()
            )));
        }
        Ok(())
    }

    /// `P(recall | x)` for an already-scaled input.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            Member::RandomForest(m) => m.predict_proba(x),
            Member::GradientBoosting(m) => m.predict_proba(x),
            Member::Svm(m) => m.predict_proba(x),
            Member::LogisticRegression(m) => m.predict_proba(x),
        })
    }

    /// Hard vote; the SVM votes by the sign of its decision value, the
    /// others by `p >= 0.5`.
    pub fn predict_label(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(match self {
            Member::Svm(m) => m.decision(x) >= 0.0,
            _ => self.predict_proba(x)? >= 0.5,
        })
    }
}

/// Shape and class checks shared by every trainer.
pub(crate) fn check_training_set(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(RadarError::InvalidInput(format!(
            "{} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(RadarError::InvalidInput("training needs at least 2 rows".into()));
    }
    let dim = x[0].len();
    if dim == 0 {
        return Err(RadarError::InvalidInput("rows have no features".into()));
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(RadarError::Shape(format!(
                "row {i} has {} features, expected {dim}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(RadarError::InvalidInput(format!("row {i} has non-finite values")));
        }
    }
    if y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
        return Err(RadarError::SingleClass);
    }
    Ok(dim)
}

/// Trains one member on scaled rows; deterministic in `(x, y, hyper, seed)`.
pub fn train_member(
    kind: MemberKind,
    x: &[Vec<f64>],
    y: &[bool],
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<Member> {
    check_training_set(x, y)?;
    let mut rng = rng::member_rng(seed, kind.stream());
    Ok(match kind {
        MemberKind::RandomForest => Member::RandomForest(RandomForest::fit(x, y, &hyper.random_forest, &mut rng)?),
        MemberKind::GradientBoosting => {
            Member::GradientBoosting(GradientBoosting::fit(x, y, &hyper.gradient_boosting)?)
        }
        MemberKind::Svm => Member::Svm(LinearSvm::fit(x, y, &hyper.svm)?),
        MemberKind::LogisticRegression => {
            Member::LogisticRegression(LogisticRegression::fit(x, y, &hyper.logistic_regression)?)
        }
    })
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
