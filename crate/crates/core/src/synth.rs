// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded synthetic traces: arbitrary valid traces for property tests, and
//! recall/reasoning archetypes for end-to-end runs without a language model.
//!
//! Archetypes are placed on a single axis `s` in `[0, 1]`, 0 being pure
//! recall and 1 pure reasoning:
//!
//! | signal | recall end | reasoning end |
//! |---|---|---|
//! | confidence peak | early, high | late, lower |
//! | attention | sharp rows | near-uniform rows |
//! | hidden states | rank 1, flat norms | rank growing with depth, growing norms |

use rand::{Rng as _, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::classify::rng::{derive_seed, Rng};
use crate::dataset::{self, Category, PromptRecord};
use crate::trace::{ActivationTrace, Label, ModelMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub num_layers: usize,
    pub num_heads: usize,
    pub seq_len: usize,
    pub hidden_dim: usize,
    pub vocab_size: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            num_layers: 12,
            num_heads: 4,
            seq_len: 8,
            hidden_dim: 16,
            vocab_size: 1000,
        }
    }
}

fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn softmax_row(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    logits.iter_mut().for_each(|v| *v = (*v - max).exp());
    let sum: f64 = logits.iter().sum();
    logits.iter_mut().for_each(|v| *v /= sum);
}

fn empty_trace(prompt_id: String, prompt: String, dims: Dims) -> ActivationTrace {
    ActivationTrace {
        prompt_id,
        prompt,
        label: None,
        category: None,
        model: ModelMeta {
            name: "synthetic".into(),
            num_layers: dims.num_layers,
            num_heads: dims.num_heads,
            hidden_dim: dims.hidden_dim,
            vocab_size: dims.vocab_size,
        },
        seq_len: dims.seq_len,
        confidence: Vec::with_capacity(dims.num_layers),
        entropy: Vec::with_capacity(dims.num_layers),
        attention: Vec::with_capacity(dims.num_layers * dims.num_heads * dims.seq_len * dims.seq_len),
        hidden_states: Vec::with_capacity(dims.num_layers * dims.seq_len * dims.hidden_dim),
    }
}

/// Small random dimensions, every axis at least 1.
pub fn random_dims(rng: &mut Rng) -> Dims {
    Dims {
        num_layers: rng.random_range(1..=8),
        num_heads: rng.random_range(1..=4),
        seq_len: rng.random_range(1..=6),
        hidden_dim: rng.random_range(1..=8),
        vocab_size: rng.random_range(2..=50_000),
    }
}

/// A valid trace with no structure beyond the format invariants. Mixes in
/// the awkward cases: tied confidences, one-hot and causally masked
/// attention rows, rank-deficient and all-zero hidden layers.
pub fn random_trace(rng: &mut Rng, dims: Dims) -> ActivationTrace {
    let Dims {
        num_layers: l,
        num_heads: hn,
        seq_len: t,
        hidden_dim: d,
        vocab_size: v,
    } = dims;
    let mut trace = empty_trace(format!("random-{:016x}", rng.random::<u64>()), "random".into(), dims);
    let ln_v = (v as f64).ln();
    for i in 0..l {
        let c = if i > 0 && rng.random_bool(0.15) {
            trace.confidence[i - 1]
        } else {
            rng.random::<f64>()
        };
        trace.confidence.push(c);
        trace.entropy.push(rng.random::<f64>() * ln_v);
    }
    let mut row = vec![0.0; t];
    for _ in 0..l * hn {
        let style = rng.random_range(0..4);
        let scale = rng.random::<f64>() * 6.0;
        for r in 0..t {
            match style {
                0 => {
                    row.fill(0.0);
                    row[rng.random_range(0..t)] = 1.0;
                }
                1 => {
                    for (j, x) in row.iter_mut().enumerate() {
                        *x = if j <= r { scale * normal(rng) } else { f64::NEG_INFINITY };
                    }
                    softmax_row(&mut row);
                }
                _ => {
                    row.iter_mut().for_each(|x| *x = scale * normal(rng));
                    softmax_row(&mut row);
                }
            }
            trace.attention.extend_from_slice(&row);
        }
    }
    for _ in 0..l {
        let style = rng.random_range(0..5);
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        match style {
            0 => trace.hidden_states.extend(std::iter::repeat_n(0.0, t * d)),
            1 => {
                let a: Vec<f64> = (0..t).map(|_| normal(rng)).collect();
                let b: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
                for ai in &a {
                    trace.hidden_states.extend(b.iter().map(|bj| scale * ai * bj));
                }
            }
            _ => trace.hidden_states.extend((0..t * d).map(|_| scale * normal(rng))),
        }
    }
    trace
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

/// Archetype trace at position `s` on the recall (0) to reasoning (1) axis,
/// with `noise` scaling the per-layer jitter.
pub fn archetype_trace(rng: &mut Rng, s: f64, noise: f64, dims: Dims) -> ActivationTrace {
    let Dims {
        num_layers: l,
        num_heads: hn,
        seq_len: t,
        hidden_dim: d,
        vocab_size: v,
    } = dims;
    let s = s.clamp(0.0, 1.0);
    let mut trace = empty_trace(String::new(), String::new(), dims);
    let ln_v = (v as f64).ln();
    let depth = (l.max(2) - 1) as f64;

    let peak = lerp(0.15, 0.85, s);
    let height = lerp(0.9, 0.6, s);
    let width = 0.25;
    for i in 0..l {
        let x = i as f64 / depth;
        let bump = (-(x - peak).powi(2) / (2.0 * width * width)).exp();
        let c = (0.05 + (height - 0.05) * bump + noise * 0.05 * normal(rng)).clamp(0.0, 1.0);
        trace.confidence.push(c);
        let h = (ln_v * 0.8 * (1.0 - c) + noise * 0.1 * normal(rng)).clamp(0.0, ln_v);
        trace.entropy.push(h);
    }

    let sharpness = lerp(8f64.ln(), 0.2f64.ln(), s).exp();
    let mut row = vec![0.0; t];
    for _ in 0..l * hn {
        let head_scale = sharpness * rng.random_range(0.7..1.3) * (1.0 + noise * 0.2 * normal(rng)).abs();
        for _ in 0..t {
            row.iter_mut().for_each(|x| *x = head_scale * normal(rng));
            softmax_row(&mut row);
            trace.attention.extend_from_slice(&row);
        }
    }

    let max_rank = t.min(d);
    let base = lerp(0.5, 1.0, s);
    for i in 0..l {
        let frac = i as f64 / depth;
        let rank = 1 + (s * frac * (max_rank - 1) as f64).round() as usize;
        let scale = base * (1.0 + 3.0 * s * frac) * (1.0 + noise * 0.05 * normal(rng));
        let mut layer = vec![0.0; t * d];
        for _ in 0..rank {
            let a: Vec<f64> = (0..t).map(|_| normal(rng)).collect();
            let b: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
            let w = scale / (rank as f64).sqrt();
            for (r, ar) in a.iter().enumerate() {
                for (c, bc) in b.iter().enumerate() {
                    layer[r * d + c] += w * ar * bc;
                }
            }
        }
        trace.hidden_states.extend(layer);
    }
    trace
}

/// Axis position drawn for a labeled record; harder categories sit closer
/// to the boundary but stay on their own side of it.
pub fn axis_position(rng: &mut Rng, label: Label, category: Category) -> f64 {
    let (lo, hi) = match category {
        Category::ClearRecall | Category::ClearReasoning => (0.0, 0.15),
        Category::ComplexReasoning => (0.0, 0.2),
        Category::Train => (0.0, 0.3),
        Category::Challenging => (0.2, 0.5),
    };
    let x = rng.random_range(lo..=hi);
    if label.is_recall() {
        x
    } else {
        1.0 - x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub dims: Dims,
    pub noise: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            dims: Dims::default(),
            noise: 1.0,
        }
    }
}

/// One archetype trace per record; trace `i` draws from its own stream so
/// the corpus is identical regardless of thread count.
pub fn corpus_from_records(records: &[PromptRecord], stem: &str, spec: CorpusSpec, seed: u64) -> Vec<ActivationTrace> {
    records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let mut rng = Rng::seed_from_u64(derive_seed(seed, i as u64));
            let s = axis_position(&mut rng, rec.label, rec.category);
            let mut trace = archetype_trace(&mut rng, s, spec.noise, spec.dims);
            trace.prompt_id = dataset::prompt_id(stem, i + 1);
            trace.prompt = rec.prompt.clone();
            trace.label = Some(rec.label);
            trace.category = Some(rec.category.to_string());
            trace
        })
        .collect()
}

/// 60 balanced training traces cycling through the bundled training prompts.
pub fn train_corpus(spec: CorpusSpec, seed: u64) -> Vec<ActivationTrace> {
    let base = dataset::bundled_train();
    let records: Vec<PromptRecord> = base.iter().cycle().take(60).cloned().collect();
    corpus_from_records(&records, "synth-train", spec, seed)
}

/// One trace per bundled test record (100).
pub fn test_corpus(spec: CorpusSpec, seed: u64) -> Vec<ActivationTrace> {
    corpus_from_records(
        &dataset::bundled_test(),
        "synth-test",
        spec,
        derive_seed(seed, u64::MAX),
    )
}
