// SPDX-License-Identifier: MIT OR Apache-2.0

//! The 37-dimensional feature vector and its CSV interchange format.

use std::io::{Read, Write};
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::config::AnalysisConfig;
use crate::error::{RadarError, Result};
use crate::mechanistic::{extract_mechanistic_features, MechanisticFeatures};
use crate::surface::{extract_surface_features, SurfaceFeatures};
use crate::trace::{ActivationTrace, Label};

pub const NUM_SURFACE: usize = 16;
pub const NUM_MECHANISTIC: usize = 21;
pub const NUM_FEATURES: usize = NUM_SURFACE + NUM_MECHANISTIC;

/// Canonical feature order: 16 surface features then 21 mechanistic ones.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "mean_confidence",
    "std_confidence",
    "max_confidence",
    "min_confidence",
    "confidence_range",
    "convergence_layer",
    "convergence_speed",
    "confidence_slope",
    "oscillation_count",
    "early_confidence",
    "late_confidence",
    "prediction_stability",
    "mean_entropy",
    "entropy_change",
    "information_gain",
    "layer_consistency",
    "num_specialized_heads",
    "head_specialization_score",
    "factual_head_activation",
    "reasoning_head_activation",
    "attention_entropy",
    "effective_circuit_depth",
    "circuit_complexity",
    "activation_flow_variance",
    "causal_path_length",
    "ablation_robustness",
    "critical_component_count",
    "performance_degradation_slope",
    "intervention_sensitivity",
    "hidden_state_variance",
    "norm_growth_trajectory",
    "working_memory_complexity",
    "state_rank_evolution",
    "direct_logit_attribution",
    "indirect_effect_strength",
    "causal_mediation_score",
    "activation_patching_effect",
];

/// Index of a feature in canonical order.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// Checks that `names` is exactly the canonical list, in order.
pub fn check_feature_names<S: AsRef<str>>(names: &[S]) -> Result<()> {
    if names.len() != NUM_FEATURES {
        return Err(RadarError::FeatureMismatch(format!(
            "expected {NUM_FEATURES} features, found {}",
            names.len()
        )));
    }
    for (i, (got, want)) in names.iter().zip(FEATURE_NAMES).enumerate() {
        if got.as_ref() != want {
            return Err(RadarError::FeatureMismatch(format!(
                "column {i} is {:?}, expected {want:?}",
                got.as_ref()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn new(surface: &SurfaceFeatures, mechanistic: &MechanisticFeatures) -> Self {
        let mut v = [0.0; NUM_FEATURES];
        v[..NUM_SURFACE].copy_from_slice(&surface.to_array());
        v[NUM_SURFACE..].copy_from_slice(&mechanistic.to_array());
        FeatureVector(v)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_FEATURES] = values.try_into().map_err(|_| {
            RadarError::FeatureMismatch(format!("expected {NUM_FEATURES} values, got {}", values.len()))
        })?;
        let fv = FeatureVector(arr);
        fv.check_finite()?;
        Ok(fv)
    }

    pub fn names() -> &'static [&'static str; NUM_FEATURES] {
        &FEATURE_NAMES
    }

    pub fn values(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }

    /// Value by canonical name.
    ///
    /// # Panics
    /// If `name` is not a canonical feature name.
    pub fn get(&self, name: &str) -> f64 {
        let i = feature_index(name).unwrap_or_else(|| panic!("unknown feature {name:?}"));
        self.0[i]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(RadarError::InvalidInput(format!(
                "feature {} is not finite",
                FEATURE_NAMES[i]
            ))),
            None => Ok(()),
        }
    }
}

/// Serializes as an ordered `{name: value}` object.
impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(NUM_FEATURES))?;
        for (name, v) in FEATURE_NAMES.iter().zip(self.0.iter()) {
            map.serialize_entry(name, v)?;
        }
        map.end()
    }
}

/// Runs both extractors and concatenates the results.
pub fn extract_features(trace: &ActivationTrace, config: &AnalysisConfig) -> Result<FeatureVector> {
    let surface = extract_surface_features(trace)?;
    let mechanistic = extract_mechanistic_features(trace, config)?;
    let fv = FeatureVector::new(&surface, &mechanistic);
    fv.check_finite()?;
    Ok(fv)
}

/// One row of a feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub prompt_id: String,
    pub label: Option<Label>,
    pub category: Option<String>,
    pub features: FeatureVector,
}

impl FeatureRow {
    pub fn from_trace(trace: &ActivationTrace, config: &AnalysisConfig) -> Result<Self> {
        Ok(FeatureRow {
            prompt_id: trace.prompt_id.clone(),
            label: trace.label,
            category: trace.category.clone(),
            features: extract_features(trace, config)?,
        })
    }
}

const META_COLUMNS: [&str; 3] = ["prompt_id", "label", "category"];

fn csv_err(e: csv::Error) -> RadarError {
    RadarError::Malformed(format!("feature CSV: {e}"))
}

/// Writes rows as CSV with the three id columns and 37 canonical columns.
pub fn write_feature_csv<W: Write>(writer: W, rows: &[FeatureRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<&str> = META_COLUMNS.iter().chain(FEATURE_NAMES.iter()).copied().collect();
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut record = vec![
            row.prompt_id.clone(),
            row.label.map(|l| l.to_string()).unwrap_or_default(),
            row.category.clone().unwrap_or_default(),
        ];
        record.extend(row.features.0.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| RadarError::Malformed(e.to_string()))
}

pub fn read_feature_csv<R: Read>(reader: R) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(csv_err)?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < META_COLUMNS.len() || cols[..3] != META_COLUMNS {
        return Err(RadarError::FeatureMismatch(format!(
            "feature CSV must start with {META_COLUMNS:?}"
        )));
    }
    check_feature_names(&cols[3..])?;
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = i + 2;
        let bad = |m: String| RadarError::Dataset { line, message: m };
        let label = match &record[1] {
            "" => None,
            s => Some(s.parse::<Label>().map_err(|e| bad(e.to_string()))?),
        };
        let category = match &record[2] {
            "" => None,
            s => Some(s.to_string()),
        };
        let values = record
            .iter()
            .skip(3)
            .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        let features = FeatureVector::from_slice(&values).map_err(|e| bad(e.to_string()))?;
        rows.push(FeatureRow {
            prompt_id: record[0].to_string(),
            label,
            category,
            features,
        });
    }
    Ok(rows)
}

pub fn read_feature_csv_file(path: &Path) -> Result<Vec<FeatureRow>> {
    let f = std::fs::File::open(path).map_err(|e| RadarError::io(path, e))?;
    read_feature_csv(std::io::BufReader::new(f))
}
