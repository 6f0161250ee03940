// SPDX-License-Identifier: MIT OR Apache-2.0

//! Activation traces: the record of one instrumented forward pass.
//!
//! A trace carries per-layer logit-lens confidence and entropy, every
//! attention pattern, and the post-block hidden states. On disk it is a
//! single JSON document (`.radar.json`, optionally gzipped as
//! `.radar.json.gz`) with nested arrays:
//!
//! ```text
//! attention      L x Hn x T x T
//! hidden_states  L x T x D
//! ```
//!
//! In memory the tensors are stored flat in row-major order.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{RadarError, Result};
use crate::jsonfmt;

pub const TRACE_VERSION: i64 = 1;
pub const TRACE_SUFFIX: &str = ".radar.json";
pub const TRACE_SUFFIX_GZ: &str = ".radar.json.gz";

/// Slack on the upper entropy bound `ln V`.
pub const ENTROPY_BOUND_SLACK: f64 = 1e-6;

/// Binary class of a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Recall,
    Reasoning,
}

impl Label {
    /// `true` for recall, the positive class.
    pub fn is_recall(self) -> bool {
        self == Label::Recall
    }

    pub fn from_recall(recall: bool) -> Self {
        if recall {
            Label::Recall
        } else {
            Label::Reasoning
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Recall => "recall",
            Label::Reasoning => "reasoning",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = RadarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recall" => Ok(Label::Recall),
            "reasoning" => Ok(Label::Reasoning),
            other => Err(RadarError::InvalidInput(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub name: String,
    pub num_layers: usize,
    pub num_heads: usize,
    pub hidden_dim: usize,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    pub prompt_id: String,
    pub prompt: String,
    pub label: Option<Label>,
    pub category: Option<String>,
    pub model: ModelMeta,
    pub seq_len: usize,
    /// Max softmax probability per layer.
    pub confidence: Vec<f64>,
    /// Full-vocabulary entropy per layer, natural log.
    pub entropy: Vec<f64>,
    /// Flat `L x Hn x T x T`.
    pub attention: Vec<f64>,
    /// Flat `L x T x D`.
    pub hidden_states: Vec<f64>,
}

impl ActivationTrace {
    pub fn num_layers(&self) -> usize {
        self.model.num_layers
    }

    pub fn num_heads(&self) -> usize {
        self.model.num_heads
    }

    pub fn hidden_dim(&self) -> usize {
        self.model.hidden_dim
    }

    /// The `T x T` attention pattern of one head, row-major.
    pub fn attention_head(&self, layer: usize, head: usize) -> &[f64] {
        let t2 = self.seq_len * self.seq_len;
        let start = (layer * self.model.num_heads + head) * t2;
        &self.attention[start..start + t2]
    }

    /// The `T x D` hidden-state slice of one layer, row-major.
    pub fn hidden_layer(&self, layer: usize) -> &[f64] {
        let td = self.seq_len * self.model.hidden_dim;
        &self.hidden_states[layer * td..(layer + 1) * td]
    }

    fn attention_len(&self) -> usize {
        self.model.num_layers * self.model.num_heads * self.seq_len * self.seq_len
    }

    fn hidden_len(&self) -> usize {
        self.model.num_layers * self.seq_len * self.model.hidden_dim
    }
}

/// One broken trace invariant, with its location.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("model metadata: {field} must be at least 1")]
    MetaField { field: &'static str },
    #[error("seq_len must be at least 1")]
    SeqLen,
    #[error("shape mismatch: {what} has length {actual}, expected {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite value in {field} at {index:?}")]
    NonFinite { field: &'static str, index: Vec<usize> },
    #[error("confidence bound, layer {layer}: {value} not in [0, 1]")]
    ConfidenceBound { layer: usize, value: f64 },
    #[error("entropy bound, layer {layer}: {value} not in [0, {max}]")]
    EntropyBound { layer: usize, value: f64, max: f64 },
    #[error("negative attention at layer {layer}, head {head}, row {row}, column {col}: {value}")]
    NegativeAttention {
        layer: usize,
        head: usize,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("row-stochastic violation at layer {layer}, head {head}, row {row} (sum {sum})")]
    RowStochastic {
        layer: usize,
        head: usize,
        row: usize,
        sum: f64,
    },
}

/// Checks every trace invariant with the default attention tolerance.
pub fn validate_trace(trace: &ActivationTrace) -> Vec<Violation> {
    validate_trace_with(trace, crate::config::AnalysisConfig::default().attention_row_tolerance)
}

/// Checks every trace invariant; an empty list means the trace is valid.
///
/// Shape problems are reported alone, since value checks would index out of
/// bounds.
pub fn validate_trace_with(trace: &ActivationTrace, row_tolerance: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = &trace.model;
    for (field, v) in [
        ("num_layers", m.num_layers),
        ("num_heads", m.num_heads),
        ("hidden_dim", m.hidden_dim),
        ("vocab_size", m.vocab_size),
    ] {
        if v == 0 {
            out.push(Violation::MetaField { field });
        }
    }
    if trace.seq_len == 0 {
        out.push(Violation::SeqLen);
    }
    let lengths = [
        ("confidence", m.num_layers, trace.confidence.len()),
        ("entropy", m.num_layers, trace.entropy.len()),
        ("attention", trace.attention_len(), trace.attention.len()),
        ("hidden_states", trace.hidden_len(), trace.hidden_states.len()),
    ];
    for (what, expected, actual) in lengths {
        if expected != actual {
            out.push(Violation::Shape { what, expected, actual });
        }
    }
    if !out.is_empty() {
        return out;
    }

    let max_entropy = (m.vocab_size as f64).ln() + ENTROPY_BOUND_SLACK;
    for (layer, &c) in trace.confidence.iter().enumerate() {
        if !c.is_finite() {
            out.push(Violation::NonFinite {
                field: "confidence",
                index: vec![layer],
            });
        } else if !(0.0..=1.0).contains(&c) {
            out.push(Violation::ConfidenceBound { layer, value: c });
        }
    }
    for (layer, &h) in trace.entropy.iter().enumerate() {
        if !h.is_finite() {
            out.push(Violation::NonFinite {
                field: "entropy",
                index: vec![layer],
            });
        } else if !(0.0..=max_entropy).contains(&h) {
            out.push(Violation::EntropyBound {
                layer,
                value: h,
                max: max_entropy,
            });
        }
    }

    let t = trace.seq_len;
    for layer in 0..m.num_layers {
        for head in 0..m.num_heads {
            let pattern = trace.attention_head(layer, head);
            for (row, weights) in pattern.chunks_exact(t).enumerate() {
                let mut row_ok = true;
                for (col, &a) in weights.iter().enumerate() {
                    if !a.is_finite() {
                        out.push(Violation::NonFinite {
                            field: "attention",
                            index: vec![layer, head, row, col],
                        });
                        row_ok = false;
                    } else if a < 0.0 {
                        out.push(Violation::NegativeAttention {
                            layer,
                            head,
                            row,
                            col,
                            value: a,
                        });
                        row_ok = false;
                    }
                }
                if row_ok {
                    let sum: f64 = weights.iter().sum();
                    if (sum - 1.0).abs() > row_tolerance {
                        out.push(Violation::RowStochastic { layer, head, row, sum });
                    }
                }
            }
        }
    }

    let d = m.hidden_dim;
    for (i, &x) in trace.hidden_states.iter().enumerate() {
        if !x.is_finite() {
            let layer = i / (t * d);
            let token = (i / d) % t;
            out.push(Violation::NonFinite {
                field: "hidden_states",
                index: vec![layer, token, i % d],
            });
        }
    }
    out
}

fn invalid(mut violations: Vec<Violation>) -> RadarError {
    let count = violations.len();
    RadarError::Invalid {
        first: violations.swap_remove(0),
        count,
    }
}

#[derive(Deserialize)]
struct RawTrace {
    radar_trace_version: i64,
    prompt_id: String,
    prompt: String,
    label: Option<Label>,
    category: Option<String>,
    model: ModelMeta,
    seq_len: usize,
    confidence: Vec<f64>,
    entropy: Vec<f64>,
    attention: Vec<Vec<Vec<Vec<f64>>>>,
    hidden_states: Vec<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct VersionProbe {
    radar_trace_version: i64,
}

fn check_len(path: &str, actual: usize, expected: usize, dim: &str) -> Result<()> {
    if actual != expected {
        return Err(RadarError::Shape(format!(
            "{path} has {actual} entries, expected {dim}={expected}"
        )));
    }
    Ok(())
}

/// Parses and fully validates a trace document.
pub fn parse_trace(bytes: &[u8]) -> Result<ActivationTrace> {
    let raw: RawTrace = match serde_json::from_slice(bytes) {
        Ok(raw) => raw,
        Err(e) => {
            if let Ok(probe) = serde_json::from_slice::<VersionProbe>(bytes) {
                if probe.radar_trace_version != TRACE_VERSION {
                    return Err(RadarError::UnsupportedVersion(probe.radar_trace_version));
                }
            }
            return Err(e.into());
        }
    };
    if raw.radar_trace_version != TRACE_VERSION {
        return Err(RadarError::UnsupportedVersion(raw.radar_trace_version));
    }
    let m = &raw.model;
    let (l, hn, t, d) = (m.num_layers, m.num_heads, raw.seq_len, m.hidden_dim);
    check_len("confidence", raw.confidence.len(), l, "L")?;
    check_len("entropy", raw.entropy.len(), l, "L")?;
    check_len("attention", raw.attention.len(), l, "L")?;
    let mut attention = Vec::with_capacity(l * hn * t * t);
    for (li, layer) in raw.attention.iter().enumerate() {
        check_len(&format!("attention[{li}]"), layer.len(), hn, "Hn")?;
        for (hi, head) in layer.iter().enumerate() {
            check_len(&format!("attention[{li}][{hi}]"), head.len(), t, "T")?;
            for (ri, row) in head.iter().enumerate() {
                check_len(&format!("attention[{li}][{hi}][{ri}]"), row.len(), t, "T")?;
                attention.extend_from_slice(row);
            }
        }
    }
    check_len("hidden_states", raw.hidden_states.len(), l, "L")?;
    let mut hidden_states = Vec::with_capacity(l * t * d);
    for (li, layer) in raw.hidden_states.iter().enumerate() {
        check_len(&format!("hidden_states[{li}]"), layer.len(), t, "T")?;
        for (ti, token) in layer.iter().enumerate() {
            check_len(&format!("hidden_states[{li}][{ti}]"), token.len(), d, "D")?;
            hidden_states.extend_from_slice(token);
        }
    }
    let trace = ActivationTrace {
        prompt_id: raw.prompt_id,
        prompt: raw.prompt,
        label: raw.label,
        category: raw.category,
        model: raw.model,
        seq_len: raw.seq_len,
        confidence: raw.confidence,
        entropy: raw.entropy,
        attention,
        hidden_states,
    };
    let violations = validate_trace(&trace);
    if !violations.is_empty() {
        return Err(invalid(violations));
    }
    Ok(trace)
}

/// A flat buffer serialized as nested arrays of the given shape.
struct Nested<'a> {
    data: &'a [f64],
    dims: &'a [usize],
}

impl Serialize for Nested<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (&outer, inner) = self
            .dims
            .split_first()
            .expect("nested view needs at least one dimension");
        let mut seq = s.serialize_seq(Some(outer))?;
        if inner.is_empty() {
            for v in self.data {
                seq.serialize_element(v)?;
            }
        } else {
            let stride: usize = inner.iter().product();
            for chunk in self.data.chunks_exact(stride.max(1)).take(outer) {
                seq.serialize_element(&Nested {
                    data: chunk,
                    dims: inner,
                })?;
            }
        }
        seq.end()
    }
}

#[derive(Serialize)]
struct TraceDoc<'a> {
    radar_trace_version: i64,
    prompt_id: &'a str,
    prompt: &'a str,
    label: Option<Label>,
    category: Option<&'a str>,
    model: &'a ModelMeta,
    seq_len: usize,
    confidence: &'a [f64],
    entropy: &'a [f64],
    attention: Nested<'a>,
    hidden_states: Nested<'a>,
}

/// Serializes a valid trace; refuses traces that break any invariant.
pub fn write_trace(trace: &ActivationTrace) -> Result<Vec<u8>> {
    let violations = validate_trace(trace);
    if !violations.is_empty() {
        return Err(invalid(violations));
    }
    let m = &trace.model;
    let t = trace.seq_len;
    let att_dims = [m.num_layers, m.num_heads, t, t];
    let hid_dims = [m.num_layers, t, m.hidden_dim];
    let doc = TraceDoc {
        radar_trace_version: TRACE_VERSION,
        prompt_id: &trace.prompt_id,
        prompt: &trace.prompt,
        label: trace.label,
        category: trace.category.as_deref(),
        model: m,
        seq_len: t,
        confidence: &trace.confidence,
        entropy: &trace.entropy,
        attention: Nested {
            data: &trace.attention,
            dims: &att_dims,
        },
        hidden_states: Nested {
            data: &trace.hidden_states,
            dims: &hid_dims,
        },
    };
    let mut out = jsonfmt::to_vec(&doc)?;
    out.push(b'\n');
    Ok(out)
}

fn is_gzip_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// True if the file name carries one of the trace suffixes.
pub fn is_trace_path(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.ends_with(TRACE_SUFFIX) || n.ends_with(TRACE_SUFFIX_GZ))
}

/// Reads a trace file, decompressing `.gz` files.
pub fn read_trace_file(path: &Path) -> Result<ActivationTrace> {
    let raw = std::fs::read(path).map_err(|e| RadarError::io(path, e))?;
    let bytes = if is_gzip_path(path) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| RadarError::io(path, e))?;
        out
    } else {
        raw
    };
    parse_trace(&bytes)
}

/// Writes a trace file, gzip-compressing when the path ends in `.gz`.
pub fn write_trace_file(path: &Path, trace: &ActivationTrace) -> Result<()> {
    let bytes = write_trace(trace)?;
    let data = if is_gzip_path(path) {
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(&bytes).map_err(|e| RadarError::io(path, e))?;
        enc.finish().map_err(|e| RadarError::io(path, e))?
    } else {
        bytes
    };
    std::fs::write(path, data).map_err(|e| RadarError::io(path, e))
}
