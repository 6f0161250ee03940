// SPDX-License-Identifier: MIT OR Apache-2.0

//! C ABI over `radar-core`.
//!
//! Traces and models are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`RadarStatus`]; on failure the
//! message is available from [`radar_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;

use radar::classify::EnsembleModel;
use radar::config::AnalysisConfig;
use radar::features::{extract_features, FeatureVector, FEATURE_NAMES, NUM_FEATURES};
use radar::trace::{self, ActivationTrace};
use radar::RadarError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Malformed = 4,
    InvalidTrace = 5,
    FeatureMismatch = 6,
    InvalidInput = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadarLabel {
    Recall = 0,
    Reasoning = 1,
}

pub const RADAR_NUM_MEMBERS: usize = 4;

/// Ensemble output. Members are ordered random forest, gradient boosting,
/// SVM, logistic regression.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPrediction {
    pub label: RadarLabel,
    pub confidence: f64,
    pub mean_probability: f64,
    pub member_votes: [RadarLabel; RADAR_NUM_MEMBERS],
    pub member_probabilities: [f64; RADAR_NUM_MEMBERS],
    pub rds: f64,
    pub rci: f64,
    pub mechanistic: f64,
    pub circuit: f64,
}

/// Opaque validated trace.
pub struct RadarTrace(ActivationTrace);

/// Opaque trained ensemble.
pub struct RadarModel(EnsembleModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &RadarError) -> RadarStatus {
    match e {
        RadarError::Io { .. } => RadarStatus::Io,
        RadarError::Malformed(_)
        | RadarError::UnsupportedVersion(_)
        | RadarError::Shape(_)
        | RadarError::Dataset { .. } => RadarStatus::Malformed,
        RadarError::Invalid { .. } => RadarStatus::InvalidTrace,
        RadarError::FeatureMismatch(_) => RadarStatus::FeatureMismatch,
        _ => RadarStatus::InvalidInput,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (RadarStatus, String)>) -> RadarStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RadarStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RadarStatus::Panic
        }
    }
}

fn fail(e: RadarError) -> (RadarStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RadarStatus, String) {
    (RadarStatus::NullPointer, format!("{what} is null"))
}

unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], (RadarStatus, String)> {
    if data.is_null() {
        return if len == 0 { Ok(&[]) } else { Err(null("data")) };
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, (RadarStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| (RadarStatus::InvalidUtf8, "path is not valid UTF-8".into()))
}

fn prediction(p: &radar::classify::PredictionResult) -> RadarPrediction {
    let label = |l: radar::Label| {
        if l.is_recall() {
            RadarLabel::Recall
        } else {
            RadarLabel::Reasoning
        }
    };
    let mut votes = [RadarLabel::Reasoning; RADAR_NUM_MEMBERS];
    let mut probs = [0.0; RADAR_NUM_MEMBERS];
    for (i, m) in p.members.iter().enumerate().take(RADAR_NUM_MEMBERS) {
        votes[i] = label(m.vote);
        probs[i] = m.probability;
    }
    RadarPrediction {
        label: label(p.label),
        confidence: p.confidence,
        mean_probability: p.mean_probability,
        member_votes: votes,
        member_probabilities: probs,
        rds: p.scores.rds,
        rci: p.scores.rci,
        mechanistic: p.scores.mechanistic,
        circuit: p.scores.circuit,
    }
}

/// Library version, static NUL-terminated string.
#[no_mangle]
pub extern "C" fn radar_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}

/// Message of the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn radar_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Length of a feature vector (37).
#[no_mangle]
pub extern "C" fn radar_feature_count() -> usize {
    NUM_FEATURES
}

/// Canonical name of feature `index`, or null when out of range.
#[no_mangle]
pub extern "C" fn radar_feature_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| {
        FEATURE_NAMES
            .iter()
            .map(|n| CString::new(*n).expect("feature names have no NUL"))
            .collect()
    });
    names.get(index).map_or(std::ptr::null(), |n| n.as_ptr())
}

/// Parses and validates trace JSON (uncompressed).
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radar_trace_parse(data: *const u8, len: usize, out: *mut *mut RadarTrace) -> RadarStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = trace::parse_trace(bytes(data, len)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(RadarTrace(t)));
        Ok(())
    })
}

/// Reads a `.radar.json` or `.radar.json.gz` file.
///
/// # Safety
/// `file` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radar_trace_load(file: *const c_char, out: *mut *mut RadarTrace) -> RadarStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = trace::read_trace_file(path(file)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(RadarTrace(t)));
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn radar_trace_free(trace: *mut RadarTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of layers in the trace.
///
/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn radar_trace_num_layers(trace: *const RadarTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.num_layers())
}

/// Writes the 37 features with default analysis settings into `out`, which
/// must hold at least `radar_feature_count()` values.
///
/// # Safety
/// `trace` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn radar_extract_features(trace: *const RadarTrace, out: *mut f64, len: usize) -> RadarStatus {
    guard(|| {
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < NUM_FEATURES {
            return Err((
                RadarStatus::BufferTooSmall,
                format!("need {NUM_FEATURES} values, got {len}"),
            ));
        }
        let f = extract_features(&t.0, &AnalysisConfig::default()).map_err(fail)?;
        std::slice::from_raw_parts_mut(out, NUM_FEATURES).copy_from_slice(&f.0);
        Ok(())
    })
}

/// Parses a model file's contents.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radar_model_parse(data: *const u8, len: usize, out: *mut *mut RadarModel) -> RadarStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = EnsembleModel::from_json(bytes(data, len)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(RadarModel(m)));
        Ok(())
    })
}

/// # Safety
/// `file` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radar_model_load(file: *const c_char, out: *mut *mut RadarModel) -> RadarStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = EnsembleModel::load(path(file)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(RadarModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn radar_model_free(model: *mut RadarModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Classifies a feature vector in canonical order; `len` must be 37.
///
/// # Safety
/// `model` must be a live handle, `features` must point to `len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radar_model_predict(
    model: *const RadarModel,
    features: *const f64,
    len: usize,
    out: *mut RadarPrediction,
) -> RadarStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if features.is_null() {
            return Err(null("features"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let f = FeatureVector::from_slice(std::slice::from_raw_parts(features, len)).map_err(fail)?;
        let p = m.0.predict(&f).map_err(fail)?;
        *out = prediction(&p);
        Ok(())
    })
}

/// Extracts features with the model's analysis settings and classifies them.
///
/// # Safety
/// `model` and `trace` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radar_model_predict_trace(
    model: *const RadarModel,
    trace: *const RadarTrace,
    out: *mut RadarPrediction,
) -> RadarStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = extract_features(&t.0, &m.0.analysis).map_err(fail)?;
        let p = m.0.predict(&f).map_err(fail)?;
        *out = prediction(&p);
        Ok(())
    })
}
