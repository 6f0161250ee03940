// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reference feature implementation written straight from the formulas,
//! sharing no code with the library. Algorithms differ on purpose:
//! compensated sums, Welford variance, closed-form slope denominators, and
//! Jacobi eigenvalues of the Gram matrix instead of an SVD.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use radar::ActivationTrace;

pub const TAU_SPEC: f64 = 1.5;
pub const EPS: f64 = 1e-8;
pub const RANK_REL: f64 = 0.01;

/// Features that depend on singular values.
pub const SVD_DERIVED: [&str; 2] = ["state_rank_evolution", "working_memory_complexity"];

/// Neumaier compensated sum.
pub fn ksum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn kmean(xs: &[f64]) -> f64 {
    ksum(xs.iter().copied()) / xs.len() as f64
}

/// Welford; returns (mean, M2).
fn welford(xs: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    (mean, m2)
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (welford(xs).1 / (xs.len() - 1) as f64).sqrt()
}

pub fn pop_var(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    welford(xs).1 / xs.len() as f64
}

/// Least-squares slope over x = 0..n-1 using sum((x - xbar) y) / (n (n^2 - 1) / 12).
pub fn slope(ys: &[f64]) -> f64 {
    let n = ys.len();
    if n < 2 || ys.iter().all(|&y| y == ys[0]) {
        return 0.0;
    }
    let xbar = (n - 1) as f64 / 2.0;
    let num = ksum(ys.iter().enumerate().map(|(i, &y)| (i as f64 - xbar) * y));
    let nf = n as f64;
    num / (nf * (nf * nf - 1.0) / 12.0)
}

pub fn row_entropy(p: &[f64]) -> f64 {
    -ksum(p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Singular values of a row-major `rows x cols` matrix via the smaller Gram matrix.
pub fn singular_values(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let (n, gram): (usize, Box<dyn Fn(usize, usize) -> f64>) = if rows <= cols {
        (
            rows,
            Box::new(move |i, j| ksum((0..cols).map(|k| m[i * cols + k] * m[j * cols + k]))),
        )
    } else {
        (
            cols,
            Box::new(move |i, j| ksum((0..rows).map(|k| m[k * cols + i] * m[k * cols + j]))),
        )
    };
    let g: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| gram(i, j)).collect()).collect();
    jacobi_eigenvalues(g).into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

pub fn rank(m: &[f64], rows: usize, cols: usize) -> usize {
    let sv = singular_values(m, rows, cols);
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_REL * max).count()
}

/// All 37 features by name.
pub fn reference_features(t: &ActivationTrace) -> BTreeMap<&'static str, f64> {
    let mut f = BTreeMap::new();
    let c = &t.confidence;
    let h = &t.entropy;
    let l = c.len();

    let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = c.iter().copied().fold(f64::INFINITY, f64::min);
    let lstar = c.iter().position(|&v| v == max).unwrap();
    let sd = sample_sd(c);
    f.insert("mean_confidence", kmean(c));
    f.insert("std_confidence", sd);
    f.insert("max_confidence", max);
    f.insert("min_confidence", min);
    f.insert("confidence_range", max - min);
    f.insert("convergence_layer", lstar as f64);
    f.insert("convergence_speed", 1.0 / (lstar as f64 + 1.0));
    f.insert("confidence_slope", slope(c));
    let d: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    f.insert(
        "oscillation_count",
        d.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as f64,
    );
    let half = l / 2;
    f.insert("early_confidence", if half == 0 { c[0] } else { kmean(&c[..half]) });
    f.insert("late_confidence", kmean(&c[l - l.div_ceil(2)..]));
    f.insert("prediction_stability", 1.0 - sd);
    f.insert("mean_entropy", kmean(h));
    f.insert("entropy_change", h[l - 1] - h[0]);
    f.insert("information_gain", -(h[l - 1] - h[0]));
    f.insert("layer_consistency", 1.0 - sample_sd(h));

    let hn = t.model.num_heads;
    let tt = t.seq_len;
    let dd = t.model.hidden_dim;
    let mut heads = Vec::new();
    let mut layer_means = Vec::new();
    for li in 0..l {
        let mut per_layer = Vec::new();
        for hi in 0..hn {
            let base = (li * hn + hi) * tt * tt;
            let rows: Vec<f64> = (0..tt)
                .map(|r| row_entropy(&t.attention[base + r * tt..base + (r + 1) * tt]))
                .collect();
            per_layer.push(kmean(&rows));
        }
        layer_means.push(kmean(&per_layer));
        heads.extend(per_layer);
    }
    let hbar = kmean(&heads);
    let nspec = heads.iter().filter(|&&x| x < TAU_SPEC).count();
    f.insert("num_specialized_heads", nspec as f64);
    f.insert("head_specialization_score", 1.0 - hbar / 3.0);
    f.insert("factual_head_activation", 1.0 / (hbar + EPS));
    f.insert("reasoning_head_activation", hbar / 3.0);
    f.insert("attention_entropy", hbar);

    let mut v = Vec::new();
    let mut n = Vec::new();
    let mut r = Vec::new();
    for li in 0..l {
        let x = &t.hidden_states[li * tt * dd..(li + 1) * tt * dd];
        v.push(pop_var(x));
        let norms: Vec<f64> = (0..tt)
            .map(|ti| ksum(x[ti * dd..(ti + 1) * dd].iter().map(|a| a * a)).sqrt())
            .collect();
        n.push(kmean(&norms));
        r.push(rank(x, tt, dd) as f64);
    }
    let gamma = slope(&n);
    let var_growth = slope(&v);
    f.insert("effective_circuit_depth", l as f64);
    f.insert("circuit_complexity", var_growth * gamma);
    f.insert("activation_flow_variance", pop_var(&n));
    f.insert("causal_path_length", l as f64);

    let e: Vec<f64> = layer_means.iter().map(|m| m / 10.0).collect();
    let robust = 1.0 - hbar / 5.0;
    f.insert("ablation_robustness", robust);
    f.insert("critical_component_count", nspec.max(1) as f64);
    f.insert("performance_degradation_slope", sample_sd(&e).abs());
    f.insert("intervention_sensitivity", hbar / 5.0);

    f.insert("hidden_state_variance", kmean(&v));
    f.insert("norm_growth_trajectory", gamma);
    f.insert("working_memory_complexity", slope(&r));
    f.insert("state_rank_evolution", slope(&r));

    let direct = kmean(&e);
    let indirect = sample_sd(&e);
    f.insert("direct_logit_attribution", direct);
    f.insert("indirect_effect_strength", indirect);
    f.insert("causal_mediation_score", direct * indirect);
    f.insert("activation_patching_effect", direct);
    f
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
