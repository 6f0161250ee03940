// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use super::sigmoid;
use super::tree::{grow_regression_tree, Node};
use crate::error::{RadarError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostingParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 1,
        }
    }
}

impl BoostingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(RadarError::Hyperparameter(
                "gradient_boosting needs n_trees, max_depth and min_samples_leaf >= 1".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(RadarError::Hyperparameter(
                "gradient_boosting.learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Additive logistic model: `p = sigmoid(init + lr * sum(tree(x)))`.
///
/// Each tree is a least-squares fit to the current residuals `y - p`, with
/// leaves set to the one-step Newton update `sum(r) / sum(p (1 - p))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub num_features: usize,
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Node>,
}

impl GradientBoosting {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &BoostingParams) -> Result<Self> {
        params.validate()?;
        let n = x.len();
        let targets: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
        let prior = targets.iter().sum::<f64>() / n as f64;
        let init = (prior / (1.0 - prior)).ln();
        let mut scores = vec![init; n];
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            let probs: Vec<f64> = scores.iter().map(|&s| sigmoid(s)).collect();
            let residuals: Vec<f64> = targets.iter().zip(&probs).map(|(t, p)| t - p).collect();
            let newton = |idx: &[usize]| {
                let num: f64 = idx.iter().map(|&i| residuals[i]).sum();
                let den: f64 = idx.iter().map(|&i| probs[i] * (1.0 - probs[i])).sum();
                if den < 1e-150 {
                    0.0
                } else {
                    num / den
                }
            };
            let mut idx: Vec<usize> = (0..n).collect();
            let tree = grow_regression_tree(
                x,
                &residuals,
                &mut idx,
                params.max_depth,
                params.min_samples_leaf,
                &newton,
            );
            for (s, row) in scores.iter_mut().zip(x) {
                *s += params.learning_rate * tree.predict(row);
            }
            trees.push(tree);
        }
        Ok(GradientBoosting {
            num_features: x[0].len(),
            init,
            learning_rate: params.learning_rate,
            trees,
        })
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}
