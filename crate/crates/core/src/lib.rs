// SPDX-License-Identifier: MIT OR Apache-2.0

//! Recall-versus-reasoning detection from transformer activation traces.
//!
//! A trace records per-layer confidence and entropy, attention patterns and
//! hidden states for a single prompt. [`features::extract_features`] turns it
//! into 37 numbers (16 surface, 21 mechanistic), and
//! [`classify::EnsembleModel`] labels the vector with a hard-vote ensemble of
//! four classifiers.
//!
//! ```no_run
//! use radar::{classify::EnsembleModel, config::AnalysisConfig, features, trace};
//! # fn main() -> radar::error::Result<()> {
//! let t = trace::read_trace_file("q1.radar.json".as_ref())?;
//! let f = features::extract_features(&t, &AnalysisConfig::default())?;
//! let model = EnsembleModel::load("detector.radar-model.json".as_ref())?;
//! println!("{}", model.predict(&f)?.label);
//! # Ok(())
//! # }
//! ```

pub mod classify;
pub mod config;
pub mod dataset;
pub mod error;
pub mod features;
pub mod jsonfmt;
pub mod mechanistic;
pub mod scoring;
pub mod stats;
pub mod surface;
pub mod synth;
pub mod trace;

pub use error::{RadarError, Result};
pub use features::{FeatureVector, FEATURE_NAMES, NUM_FEATURES};
pub use trace::{ActivationTrace, Label};
