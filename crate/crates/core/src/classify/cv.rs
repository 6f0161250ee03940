// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, member_rng, FOLD_STREAM};
use super::EnsembleModel;
use crate::config::RadarConfig;
use crate::error::{RadarError, Result};
use crate::features::FeatureVector;
use crate::trace::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub fold_sizes: Vec<usize>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

/// Splits row indices into `k` disjoint folds that keep each class spread
/// evenly: every fold holds `floor` or `ceil` of `class_count / k` rows of
/// each class. Indices within a fold are ascending.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    if k < 2 {
        return Err(RadarError::InvalidInput(format!("k must be >= 2, got {k}")));
    }
    if k > n {
        return Err(RadarError::InvalidInput(format!(
            "k = {k} exceeds the {n} available rows"
        )));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(RadarError::SingleClass);
    }
    let mut rng = member_rng(seed, FOLD_STREAM);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Stratified k-fold accuracy of the full ensemble; the scaler is refit on
/// each fold's training rows.
pub fn kfold_cv(
    rows: &[FeatureVector],
    labels: &[Label],
    k: usize,
    config: &RadarConfig,
    seed: u64,
) -> Result<CvReport> {
    if rows.len() != labels.len() {
        return Err(RadarError::InvalidInput(format!(
            "{} feature rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let y: Vec<bool> = labels.iter().map(|l| l.is_recall()).collect();
    let folds = stratified_folds(&y, k, seed)?;
    let accuracies = folds
        .par_iter()
        .enumerate()
        .map(|(fi, test)| {
            let mut in_test = vec![false; rows.len()];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = (0..rows.len()).filter(|&i| !in_test[i]).collect();
            let tr_rows: Vec<FeatureVector> = train.iter().map(|&i| rows[i]).collect();
            let tr_labels: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
            let model = EnsembleModel::train(&tr_rows, &tr_labels, config, derive_seed(seed, fi as u64))?;
            let mut correct = 0;
            for &i in test {
                if model.predict(&rows[i])?.label == labels[i] {
                    correct += 1;
                }
            }
            Ok(correct as f64 / test.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_accuracy = accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvReport {
        k,
        seed,
        fold_sizes: folds.iter().map(Vec::len).collect(),
        fold_accuracies: accuracies,
        mean_accuracy,
    })
}
