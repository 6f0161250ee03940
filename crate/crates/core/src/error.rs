// SPDX-License-Identifier: MIT OR Apache-2.0

//! Error type shared by every stage of the pipeline.

use std::path::PathBuf;

use crate::trace::Violation;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, RadarError>;

#[derive(Debug, thiserror::Error)]
pub enum RadarError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("unsupported trace version {0} (expected 1)")]
    UnsupportedVersion(i64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// First violation plus the total count; the full list is available from
    /// [`crate::trace::validate_trace`].
    #[error("{first}{}", if *.count > 1 { format!(" (and {} more violations)", .count - 1) } else { String::new() })]
    Invalid { first: Violation, count: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("single-class training set")]
    SingleClass,

    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),

    #[error("feature-name mismatch: {0}")]
    FeatureMismatch(String),

    #[error("dataset error at line {line}: {message}")]
    Dataset { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(String),
}

impl RadarError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RadarError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by invocation or configuration rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, RadarError::Config(_) | RadarError::Hyperparameter(_))
    }
}

impl From<serde_json::Error> for RadarError {
    fn from(e: serde_json::Error) -> Self {
        RadarError::Malformed(e.to_string())
    }
}
