// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{RadarError, Result};

/// Per-column standardization fitted on training rows.
///
/// Uses the population standard deviation. Constant columns record a
/// standard deviation of 0 and always transform to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(RadarError::Empty("scaler needs at least one row".into()));
        };
        let dim = first.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(RadarError::Shape(format!(
                    "row {i} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(RadarError::InvalidInput(format!(
                    "non-finite value at row {i}, column {j}"
                )));
            }
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in std.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for (j, s) in std.iter_mut().enumerate() {
            // exact constancy, not a tolerance: tiny but real spread still scales
            let constant = rows.iter().all(|r| r[j] == rows[0][j]);
            *s = if constant { 0.0 } else { (*s / n).sqrt() };
        }
        Ok(FeatureScaler { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(RadarError::FeatureMismatch(format!(
                "scaler expects {} values, got {}",
                self.dim(),
                x.len()
            )));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(RadarError::InvalidInput(format!("value {j} is not finite")));
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect())
    }

    /// Inverse map; constant columns come back as their mean.
    pub fn inverse_transform(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s == 0.0 { *m } else { v * s + m })
            .collect()
    }
}
