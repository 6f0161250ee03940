// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use super::{dot, sigmoid};
use crate::error::{RadarError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    /// Soft-margin penalty.
    pub c: f64,
    pub max_iter: usize,
    /// Step at iteration `t` is `learning_rate / sqrt(t)`.
    pub learning_rate: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 1000,
            learning_rate: 1.0,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0)
            || !(self.learning_rate.is_finite() && self.learning_rate > 0.0)
            || self.max_iter == 0
        {
            return Err(RadarError::Hyperparameter(
                "svm needs positive c, learning_rate and max_iter".into(),
            ));
        }
        Ok(())
    }
}

/// Sigmoid `P(recall | f) = 1 / (1 + exp(a f + b))` over decision values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattScaling {
    pub a: f64,
    pub b: f64,
}

impl PlattScaling {
    pub fn probability(&self, decision: f64) -> f64 {
        sigmoid(-(self.a * decision + self.b))
    }

    /// Newton fit with backtracking on regularized targets.
    pub fn fit(decisions: &[f64], y: &[bool]) -> Self {
        let n_pos = y.iter().filter(|&&l| l).count() as f64;
        let n_neg = y.len() as f64 - n_pos;
        let hi = (n_pos + 1.0) / (n_pos + 2.0);
        let lo = 1.0 / (n_neg + 2.0);
        let targets: Vec<f64> = y.iter().map(|&l| if l { hi } else { lo }).collect();

        let objective = |a: f64, b: f64| -> f64 {
            decisions
                .iter()
                .zip(&targets)
                .map(|(&f, &t)| {
                    let z = f * a + b;
                    if z >= 0.0 {
                        t * z + (-z).exp().ln_1p()
                    } else {
                        (t - 1.0) * z + z.exp().ln_1p()
                    }
                })
                .sum()
        };

        let mut a = 0.0;
        let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
        let mut fval = objective(a, b);
        for _ in 0..100 {
            let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
            for (&f, &t) in decisions.iter().zip(&targets) {
                let z = f * a + b;
                // p: P(negative-side sigmoid), q = 1 - p
                let (p, q) = if z >= 0.0 {
                    let e = (-z).exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                } else {
                    let e = z.exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                };
                let d2 = p * q;
                h11 += f * f * d2;
                h22 += d2;
                h21 += f * d2;
                let d1 = t - p;
                g1 += f * d1;
                g2 += d1;
            }
            if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            while step >= 1e-10 {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = objective(na, nb);
                if nf < fval + 1e-4 * step * gd {
                    a = na;
                    b = nb;
                    fval = nf;
                    break;
                }
                step /= 2.0;
            }
            if step < 1e-10 {
                break;
            }
        }
        PlattScaling { a, b }
    }
}

/// Linear soft-margin SVM trained by full-batch subgradient descent on
/// `||w||^2 / 2 + c * sum(hinge)`, keeping the best iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub calibration: PlattScaling,
}

impl LinearSvm {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &SvmParams) -> Result<Self> {
        params.validate()?;
        let n = x.len() as f64;
        let dim = x[0].len();
        let signs: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        // objective scaled by 1 / (c n) so the step size is independent of n
        let reg = 1.0 / (params.c * n);
        let objective = |w: &[f64], b: f64| -> f64 {
            let hinge: f64 = x
                .iter()
                .zip(&signs)
                .map(|(xi, s)| (1.0 - s * (dot(w, xi) + b)).max(0.0))
                .sum();
            0.5 * reg * dot(w, w) + hinge / n
        };

        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        let mut best = (objective(&w, b), w.clone(), b);
        let mut grad_w = vec![0.0; dim];
        for t in 1..=params.max_iter {
            grad_w.iter_mut().zip(&w).for_each(|(g, wi)| *g = reg * wi);
            let mut grad_b = 0.0;
            for (xi, s) in x.iter().zip(&signs) {
                if s * (dot(&w, xi) + b) < 1.0 {
                    for (g, v) in grad_w.iter_mut().zip(xi) {
                        *g -= s * v / n;
                    }
                    grad_b -= s / n;
                }
            }
            let eta = params.learning_rate / (t as f64).sqrt();
            for (wi, g) in w.iter_mut().zip(&grad_w) {
                *wi -= eta * g;
            }
            b -= eta * grad_b;
            let obj = objective(&w, b);
            if obj < best.0 {
                best = (obj, w.clone(), b);
            }
        }
        let (_, weights, intercept) = best;
        let decisions: Vec<f64> = x.iter().map(|xi| dot(&weights, xi) + intercept).collect();
        let calibration = PlattScaling::fit(&decisions, y);
        Ok(LinearSvm {
            weights,
            intercept,
            calibration,
        })
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.calibration.probability(self.decision(x))
    }
}
