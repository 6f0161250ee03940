// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use super::{dot, sigmoid};
use crate::error::{RadarError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    /// L2 penalty on the weights (the intercept is not penalized).
    pub l2: f64,
    /// Stop once every gradient component is below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2.is_finite() && self.l2 >= 0.0) || !(self.tol.is_finite() && self.tol > 0.0) || self.max_iter == 0 {
            return Err(RadarError::Hyperparameter(
                "logistic_regression needs l2 >= 0, tol > 0 and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// L2-regularized logistic regression fitted by full-batch gradient descent.
///
/// The step is the inverse of a Lipschitz bound on the gradient,
/// `mean(|x|^2 + 1) / 4 + l2`, so descent is monotone without tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

impl LogisticRegression {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &LogisticParams) -> Result<Self> {
        params.validate()?;
        let n = x.len() as f64;
        let dim = x[0].len();
        let lipschitz = x.iter().map(|xi| dot(xi, xi) + 1.0).sum::<f64>() / (4.0 * n) + params.l2;
        let step = 1.0 / lipschitz;

        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        let mut grad_w = vec![0.0; dim];
        let mut iterations = 0;
        while iterations < params.max_iter {
            grad_w.iter_mut().zip(&w).for_each(|(g, wi)| *g = params.l2 * wi);
            let mut grad_b = 0.0;
            for (xi, &yi) in x.iter().zip(y) {
                let err = sigmoid(dot(&w, xi) + b) - if yi { 1.0 } else { 0.0 };
                for (g, v) in grad_w.iter_mut().zip(xi) {
                    *g += err * v / n;
                }
                grad_b += err / n;
            }
            let max_grad = grad_w.iter().fold(grad_b.abs(), |m, g| m.max(g.abs()));
            if max_grad < params.tol {
                break;
            }
            for (wi, g) in w.iter_mut().zip(&grad_w) {
                *wi -= step * g;
            }
            b -= step * grad_b;
            iterations += 1;
        }
        Ok(LogisticRegression {
            weights: w,
            intercept: b,
            iterations,
        })
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.intercept)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_one_half() {
        let m = LogisticRegression {
            weights: vec![0.0; 37],
            intercept: 0.0,
            iterations: 0,
        };
        assert_eq!(m.predict_proba(&[3.0; 37]), 0.5);
    }

    #[test]
    fn stored_model_matches_closed_form() {
        let m = LogisticRegression {
            weights: vec![0.3, -0.7],
            intercept: 0.05,
            iterations: 0,
        };
        let z: f64 = 0.3 * 1.5 - 0.7 * -2.0 + 0.05;
        assert!((m.predict_proba(&[1.5, -2.0]) - 1.0 / (1.0 + (-z).exp())).abs() < 1e-12);
    }

    #[test]
    fn converges_on_overlapping_classes() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 10) as f64 / 5.0 - 1.0]).collect();
        let y: Vec<bool> = (0..20).map(|i| (i % 10) >= 4 && i != 15).collect();
        let m = LogisticRegression::fit(&x, &y, &LogisticParams::default()).unwrap();
        assert!(m.iterations < 1000);
        assert!(m.weights[0] > 0.0);
    }
}
