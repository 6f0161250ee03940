// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::rng::Rng;
use super::tree::{grow_classification_tree, ClassificationTreeParams, Node};
use crate::error::{RadarError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(RadarError::Hyperparameter("random_forest.n_trees must be >= 1".into()));
        }
        if self.max_features == Some(0) || self.max_depth == Some(0) {
            return Err(RadarError::Hyperparameter(
                "random_forest.max_features and max_depth must be >= 1".into(),
            ));
        }
        if self.min_samples_split < 2 || self.min_samples_leaf == 0 {
            return Err(RadarError::Hyperparameter(
                "random_forest needs min_samples_split >= 2 and min_samples_leaf >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Bagged Gini trees; the probability is the fraction of trees voting recall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub num_features: usize,
    pub trees: Vec<Node>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &ForestParams, rng: &mut Rng) -> Result<Self> {
        params.validate()?;
        let n = x.len();
        let dim = x[0].len();
        let max_features = params
            .max_features
            .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
            .clamp(1, dim);
        let tree_params = ClassificationTreeParams {
            max_features,
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            min_samples_leaf: params.min_samples_leaf,
        };
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            let mut idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            trees.push(grow_classification_tree(x, y, &mut idx, &tree_params, rng));
        }
        Ok(RandomForest {
            num_features: dim,
            trees,
        })
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict(x) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}
