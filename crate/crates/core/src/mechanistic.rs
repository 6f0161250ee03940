// SPDX-License-Identifier: MIT OR Apache-2.0

//! Mechanistic features from attention patterns and hidden states.
//!
//! Several of these are proxies rather than measurements: the "causal" and
//! "intervention" features are derived from attention entropy, critical
//! components from the specialized-head count, and working-memory
//! complexity from the trend in effective rank. No ablation or patching is
//! performed.
//!
//! Head entropy is the mean over query rows of the row entropy, so it lives
//! on a `[0, ln T]` scale where the specialization threshold and the 3.0 /
//! 5.0 normalizers are meaningful.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::error::{RadarError, Result};
use crate::stats::{mean, population_variance, sample_std};
use crate::surface::{entropy_unchecked, slope_or_zero};
use crate::trace::ActivationTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanisticFeatures {
    pub num_specialized_heads: usize,
    pub head_specialization_score: f64,
    pub factual_head_activation: f64,
    pub reasoning_head_activation: f64,
    pub attention_entropy: f64,
    pub effective_circuit_depth: f64,
    pub circuit_complexity: f64,
    pub activation_flow_variance: f64,
    pub causal_path_length: f64,
    pub ablation_robustness: f64,
    pub critical_component_count: usize,
    pub performance_degradation_slope: f64,
    pub intervention_sensitivity: f64,
    pub hidden_state_variance: f64,
    pub norm_growth_trajectory: f64,
    pub working_memory_complexity: f64,
    pub state_rank_evolution: f64,
    pub direct_logit_attribution: f64,
    pub indirect_effect_strength: f64,
    pub causal_mediation_score: f64,
    pub activation_patching_effect: f64,
}

impl MechanisticFeatures {
    pub const NAMES: [&'static str; 21] = [
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

    pub fn to_array(&self) -> [f64; 21] {
        [
            self.num_specialized_heads as f64,
            self.head_specialization_score,
            self.factual_head_activation,
            self.reasoning_head_activation,
            self.attention_entropy,
            self.effective_circuit_depth,
            self.circuit_complexity,
            self.activation_flow_variance,
            self.causal_path_length,
            self.ablation_robustness,
            self.critical_component_count as f64,
            self.performance_degradation_slope,
            self.intervention_sensitivity,
            self.hidden_state_variance,
            self.norm_growth_trajectory,
            self.working_memory_complexity,
            self.state_rank_evolution,
            self.direct_logit_attribution,
            self.indirect_effect_strength,
            self.causal_mediation_score,
            self.activation_patching_effect,
        ]
    }
}

/// Mean per-row entropy of a `T x T` attention pattern.
///
/// All-zero rows (fully masked positions) count as entropy 0.
pub fn attention_head_entropy(pattern: &[f64], seq_len: usize, row_tolerance: f64) -> Result<f64> {
    if seq_len == 0 || pattern.len() != seq_len * seq_len {
        return Err(RadarError::Shape(format!(
            "attention pattern has {} entries, expected {seq_len}x{seq_len}",
            pattern.len()
        )));
    }
    let mut total = 0.0;
    for (row, weights) in pattern.chunks_exact(seq_len).enumerate() {
        if let Some(col) = weights.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(RadarError::InvalidInput(format!(
                "attention weight at row {row}, column {col} is {}",
                weights[col]
            )));
        }
        let sum: f64 = weights.iter().sum();
        if sum == 0.0 {
            continue;
        }
        if (sum - 1.0).abs() > row_tolerance {
            return Err(RadarError::InvalidInput(format!(
                "row-stochastic violation at row {row} (sum {sum})"
            )));
        }
        total += entropy_unchecked(weights);
    }
    Ok(total / seq_len as f64)
}

/// Entropy of every head, laid out `[layer][head]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadEntropies {
    pub num_layers: usize,
    pub num_heads: usize,
    pub values: Vec<f64>,
}

impl HeadEntropies {
    pub fn layer(&self, l: usize) -> &[f64] {
        &self.values[l * self.num_heads..(l + 1) * self.num_heads]
    }

    /// Mean head entropy of each layer.
    pub fn layer_means(&self) -> Vec<f64> {
        (0..self.num_layers).map(|l| mean(self.layer(l))).collect()
    }
}

pub fn head_entropies(trace: &ActivationTrace, config: &AnalysisConfig) -> Result<HeadEntropies> {
    let (l, hn) = (trace.num_layers(), trace.num_heads());
    let mut values = Vec::with_capacity(l * hn);
    for layer in 0..l {
        for head in 0..hn {
            let h = attention_head_entropy(
                trace.attention_head(layer, head),
                trace.seq_len,
                config.attention_row_tolerance,
            )
            .map_err(|e| RadarError::InvalidInput(format!("layer {layer}, head {head}: {e}")))?;
            values.push(h);
        }
    }
    Ok(HeadEntropies {
        num_layers: l,
        num_heads: hn,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Specialization {
    pub num_specialized_heads: usize,
    pub head_specialization_score: f64,
    pub factual_head_activation: f64,
    pub reasoning_head_activation: f64,
    pub attention_entropy: f64,
}

pub fn specialization_features(entropies: &[f64], config: &AnalysisConfig) -> Result<Specialization> {
    if entropies.is_empty() {
        return Err(RadarError::Empty("no attention heads".into()));
    }
    let num_specialized_heads = entropies
        .iter()
        .filter(|&&h| h < config.specialization_threshold)
        .count();
    let h = mean(entropies);
    Ok(Specialization {
        num_specialized_heads,
        head_specialization_score: 1.0 - h / config.entropy_norm,
        factual_head_activation: 1.0 / (h + config.epsilon),
        reasoning_head_activation: h / config.entropy_norm,
        attention_entropy: h,
    })
}

/// Number of singular values above `threshold * sigma_max`; 0 for a zero matrix.
pub fn effective_rank(matrix: &[f64], rows: usize, cols: usize, threshold: f64) -> Result<usize> {
    if matrix.len() != rows * cols {
        return Err(RadarError::Shape(format!(
            "matrix has {} entries, expected {rows}x{cols}",
            matrix.len()
        )));
    }
    if let Some(i) = matrix.iter().position(|x| !x.is_finite()) {
        return Err(RadarError::InvalidInput(format!(
            "non-finite matrix entry at ({}, {})",
            i / cols.max(1),
            i % cols.max(1)
        )));
    }
    if rows == 0 || cols == 0 {
        return Ok(0);
    }
    let m = DMatrix::from_row_slice(rows, cols, matrix);
    let sv = m.singular_values();
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > threshold * sigma_max).count())
}

/// Per-layer hidden-state statistics that several feature groups share.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStats {
    /// Population variance of all `T * D` activations.
    pub variances: Vec<f64>,
    /// Mean L2 norm of the token vectors.
    pub norms: Vec<f64>,
    pub ranks: Vec<usize>,
}

pub fn layer_stats(
    hidden: &[f64],
    num_layers: usize,
    seq_len: usize,
    hidden_dim: usize,
    rank_threshold: f64,
) -> Result<LayerStats> {
    let td = seq_len * hidden_dim;
    if num_layers == 0 || td == 0 || hidden.len() != num_layers * td {
        return Err(RadarError::Shape(format!(
            "hidden states have {} entries, expected {num_layers}x{seq_len}x{hidden_dim}",
            hidden.len()
        )));
    }
    let mut stats = LayerStats {
        variances: Vec::with_capacity(num_layers),
        norms: Vec::with_capacity(num_layers),
        ranks: Vec::with_capacity(num_layers),
    };
    for slice in hidden.chunks_exact(td) {
        stats.variances.push(population_variance(slice));
        let norm_sum: f64 = slice
            .chunks_exact(hidden_dim)
            .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum();
        stats.norms.push(norm_sum / seq_len as f64);
        stats
            .ranks
            .push(effective_rank(slice, seq_len, hidden_dim, rank_threshold)?);
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingMemory {
    pub hidden_state_variance: f64,
    pub norm_growth_trajectory: f64,
    pub working_memory_complexity: f64,
    pub state_rank_evolution: f64,
}

pub fn working_memory_features(stats: &LayerStats) -> WorkingMemory {
    let ranks: Vec<f64> = stats.ranks.iter().map(|&r| r as f64).collect();
    let state_rank_evolution = slope_or_zero(&ranks);
    WorkingMemory {
        hidden_state_variance: mean(&stats.variances),
        norm_growth_trajectory: slope_or_zero(&stats.norms),
        working_memory_complexity: state_rank_evolution,
        state_rank_evolution,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitDynamics {
    pub effective_circuit_depth: f64,
    pub circuit_complexity: f64,
    pub activation_flow_variance: f64,
    pub causal_path_length: f64,
    /// Trend of per-layer activation variance.
    pub variance_growth: f64,
}

pub fn circuit_dynamics_features(stats: &LayerStats) -> CircuitDynamics {
    let depth = stats.norms.len() as f64;
    let variance_growth = slope_or_zero(&stats.variances);
    let norm_growth = slope_or_zero(&stats.norms);
    CircuitDynamics {
        effective_circuit_depth: depth,
        circuit_complexity: variance_growth * norm_growth,
        activation_flow_variance: population_variance(&stats.norms),
        causal_path_length: depth,
        variance_growth,
    }
}

/// Per-layer causal-effect proxy: mean head entropy over the attribution norm.
pub fn layer_causal_effects(entropies: &HeadEntropies, config: &AnalysisConfig) -> Vec<f64> {
    entropies
        .layer_means()
        .into_iter()
        .map(|h| h / config.attribution_norm)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intervention {
    pub ablation_robustness: f64,
    pub critical_component_count: usize,
    pub performance_degradation_slope: f64,
    pub intervention_sensitivity: f64,
}

pub fn intervention_features(
    attention_entropy: f64,
    num_specialized_heads: usize,
    effects: &[f64],
    config: &AnalysisConfig,
) -> Intervention {
    let ablation_robustness = 1.0 - attention_entropy / config.robustness_norm;
    Intervention {
        ablation_robustness,
        critical_component_count: num_specialized_heads.max(1),
        performance_degradation_slope: sample_std(effects).abs(),
        intervention_sensitivity: 1.0 - ablation_robustness,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalEffects {
    pub direct_logit_attribution: f64,
    pub indirect_effect_strength: f64,
    pub causal_mediation_score: f64,
    pub activation_patching_effect: f64,
}

pub fn causal_effect_features(effects: &[f64]) -> Result<CausalEffects> {
    if effects.is_empty() {
        return Err(RadarError::Empty("no layer effects".into()));
    }
    let direct = mean(effects);
    let indirect = sample_std(effects);
    Ok(CausalEffects {
        direct_logit_attribution: direct,
        indirect_effect_strength: indirect,
        causal_mediation_score: direct * indirect,
        activation_patching_effect: direct,
    })
}

/// Computes all 21 mechanistic features of a trace.
pub fn extract_mechanistic_features(trace: &ActivationTrace, config: &AnalysisConfig) -> Result<MechanisticFeatures> {
    let entropies = head_entropies(trace, config)?;
    let spec = specialization_features(&entropies.values, config)?;
    let stats = layer_stats(
        &trace.hidden_states,
        trace.num_layers(),
        trace.seq_len,
        trace.hidden_dim(),
        config.rank_threshold,
    )?;
    let memory = working_memory_features(&stats);
    let circuit = circuit_dynamics_features(&stats);
    let effects = layer_causal_effects(&entropies, config);
    let intervention = intervention_features(spec.attention_entropy, spec.num_specialized_heads, &effects, config);
    let causal = causal_effect_features(&effects)?;
    Ok(MechanisticFeatures {
        num_specialized_heads: spec.num_specialized_heads,
        head_specialization_score: spec.head_specialization_score,
        factual_head_activation: spec.factual_head_activation,
        reasoning_head_activation: spec.reasoning_head_activation,
        attention_entropy: spec.attention_entropy,
        effective_circuit_depth: circuit.effective_circuit_depth,
        circuit_complexity: circuit.circuit_complexity,
        activation_flow_variance: circuit.activation_flow_variance,
        causal_path_length: circuit.causal_path_length,
        ablation_robustness: intervention.ablation_robustness,
        critical_component_count: intervention.critical_component_count,
        performance_degradation_slope: intervention.performance_degradation_slope,
        intervention_sensitivity: intervention.intervention_sensitivity,
        hidden_state_variance: memory.hidden_state_variance,
        norm_growth_trajectory: memory.norm_growth_trajectory,
        working_memory_complexity: memory.working_memory_complexity,
        state_rank_evolution: memory.state_rank_evolution,
        direct_logit_attribution: causal.direct_logit_attribution,
        indirect_effect_strength: causal.indirect_effect_strength,
        causal_mediation_score: causal.causal_mediation_score,
        activation_patching_effect: causal.activation_patching_effect,
    })
}
