// SPDX-License-Identifier: MIT OR Apache-2.0

mod oracle;

use std::path::PathBuf;

use proptest::prelude::*;
use rand::SeedableRng;

use radar::classify::rng::Rng;
use radar::config::AnalysisConfig;
use radar::features::{extract_features, FeatureVector, FEATURE_NAMES};
use radar::mechanistic::{effective_rank, layer_stats};
use radar::surface::shannon_entropy;
use radar::synth::{random_dims, random_trace};
use radar::trace::read_trace_file;
use radar::ActivationTrace;

fn fixture(name: &str) -> ActivationTrace {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    read_trace_file(&p).unwrap()
}

fn features(t: &ActivationTrace) -> FeatureVector {
    extract_features(t, &AnalysisConfig::default()).unwrap()
}

fn seeded(seed: u64) -> ActivationTrace {
    let mut rng = Rng::seed_from_u64(seed);
    let dims = random_dims(&mut rng);
    random_trace(&mut rng, dims)
}

#[test]
fn two_layer_fixture_matches_hand_values() {
    let f = features(&fixture("handmade-two-layer.radar.json"));
    let tol = 1e-6;
    assert!((f.get("norm_growth_trajectory") - 2.828427).abs() < tol);
    assert!((f.get("activation_flow_variance") - 2.0).abs() < tol);
    assert_eq!(f.get("hidden_state_variance"), 0.0);
    assert_eq!(f.get("circuit_complexity"), 0.0);
    assert_eq!(f.get("state_rank_evolution"), 0.0);
    assert_eq!(f.get("effective_circuit_depth"), 2.0);
    // single-token attention rows are one-hot
    assert_eq!(f.get("num_specialized_heads"), 4.0);
    assert_eq!(f.get("attention_entropy"), 0.0);
    assert_eq!(f.get("ablation_robustness"), 1.0);
    assert!((f.get("factual_head_activation") - 1e8).abs() < 1e-6);
    for name in [
        "direct_logit_attribution",
        "indirect_effect_strength",
        "causal_mediation_score",
    ] {
        assert_eq!(f.get(name), 0.0, "{name}");
    }
    assert!((f.get("confidence_slope") - 0.3).abs() < 1e-12);
    assert_eq!(f.get("information_gain"), 1.0);
}

#[test]
fn uniform_fixture_matches_hand_values() {
    let f = features(&fixture("handmade-uniform.radar.json"));
    let tol = 1e-6;
    let expect = [
        ("mean_confidence", 0.533333),
        ("std_confidence", 0.351188),
        ("max_confidence", 0.9),
        ("min_confidence", 0.2),
        ("confidence_range", 0.7),
        ("convergence_layer", 2.0),
        ("convergence_speed", 0.333333),
        ("confidence_slope", 0.35),
        ("information_gain", 1.0),
        ("attention_entropy", 1.386294),
        ("reasoning_head_activation", 0.462098),
        ("intervention_sensitivity", 0.277259),
        ("num_specialized_heads", 6.0),
        ("critical_component_count", 6.0),
        ("direct_logit_attribution", 0.138629),
        ("indirect_effect_strength", 0.0),
        ("hidden_state_variance", 0.0),
        ("norm_growth_trajectory", 0.0),
        ("state_rank_evolution", 0.0),
    ];
    for (name, v) in expect {
        assert!((f.get(name) - v).abs() < tol, "{name}: {} vs {v}", f.get(name));
    }
}

#[test]
fn rank_oracle_agrees_on_structured_matrices() {
    let eye3 = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    assert_eq!(oracle::rank(&eye3, 3, 3), 3);
    assert_eq!(effective_rank(&eye3, 3, 3, 0.01).unwrap(), 3);
    let u = [1.0, -2.0, 0.5];
    let v = [3.0, 1.0];
    let outer: Vec<f64> = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    assert_eq!(oracle::rank(&outer, 3, 2), 1);
    assert_eq!(effective_rank(&outer, 3, 2, 0.01).unwrap(), 1);
    assert_eq!(oracle::rank(&[0.0; 6], 2, 3), 0);
    assert_eq!(effective_rank(&[0.0; 6], 2, 3, 0.01).unwrap(), 0);
}

#[test]
fn entropy_bounds() {
    let v = 50257;
    let uniform = vec![1.0 / v as f64; v];
    assert!((shannon_entropy(&uniform).unwrap() - (v as f64).ln()).abs() < 1e-12);
    assert_eq!(shannon_entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_reference_implementation(seed in any::<u64>()) {
        let t = seeded(seed);
        let got = features(&t);
        let want = oracle::reference_features(&t);
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            let tol = if i < 16 {
                1e-9
            } else if oracle::SVD_DERIVED.contains(name) {
                1e-5
            } else {
                1e-7
            };
            prop_assert!(oracle::close(got.0[i], want[name], tol), "{name}: {} vs {}", got.0[i], want[name]);
        }
    }

    #[test]
    fn exact_identities(seed in any::<u64>()) {
        let f = features(&seeded(seed));
        prop_assert_eq!(f.get("information_gain"), -f.get("entropy_change"));
        prop_assert_eq!(f.get("confidence_range"), f.get("max_confidence") - f.get("min_confidence"));
        prop_assert_eq!(f.get("prediction_stability"), 1.0 - f.get("std_confidence"));
        prop_assert_eq!(f.get("convergence_speed"), 1.0 / (f.get("convergence_layer") + 1.0));
        prop_assert_eq!(f.get("intervention_sensitivity"), 1.0 - f.get("ablation_robustness"));
        prop_assert_eq!(
            f.get("causal_mediation_score"),
            f.get("direct_logit_attribution") * f.get("indirect_effect_strength")
        );
        prop_assert_eq!(f.get("activation_patching_effect"), f.get("direct_logit_attribution"));
        prop_assert_eq!(f.get("causal_path_length"), f.get("effective_circuit_depth"));
        prop_assert_eq!(f.get("working_memory_complexity"), f.get("state_rank_evolution"));
        prop_assert_eq!(f.get("critical_component_count"), f.get("num_specialized_heads").max(1.0));
        prop_assert_eq!(f.get("reasoning_head_activation"), f.get("attention_entropy") / 3.0);
        prop_assert!((f.get("factual_head_activation") * (f.get("attention_entropy") + 1e-8) - 1.0).abs() < 1e-9);
        prop_assert!(f.get("min_confidence") <= f.get("mean_confidence") + 1e-15);
        prop_assert!(f.get("mean_confidence") <= f.get("max_confidence") + 1e-15);
    }

    #[test]
    fn bounds(seed in any::<u64>()) {
        let t = seeded(seed);
        let f = features(&t);
        let l = t.num_layers() as f64;
        prop_assert!(f.get("convergence_layer") <= l - 1.0);
        prop_assert!(f.get("oscillation_count") <= (l - 2.0).max(0.0));
        prop_assert!(f.get("num_specialized_heads") <= l * t.num_heads() as f64);
        prop_assert!(f.get("attention_entropy") >= 0.0);
        prop_assert!(f.get("attention_entropy") <= (t.seq_len as f64).ln() + 1e-12);
        prop_assert_eq!(f.get("effective_circuit_depth"), l);
    }

    #[test]
    fn hidden_state_scaling(seed in any::<u64>(), k in 0.1f64..10.0) {
        let t = seeded(seed);
        let (l, tt, d) = (t.num_layers(), t.seq_len, t.hidden_dim());
        let base = layer_stats(&t.hidden_states, l, tt, d, 0.01).unwrap();
        let scaled: Vec<f64> = t.hidden_states.iter().map(|x| x * k).collect();
        let s = layer_stats(&scaled, l, tt, d, 0.01).unwrap();
        prop_assert_eq!(&s.ranks, &base.ranks);
        for i in 0..l {
            prop_assert!(oracle::close(s.norms[i], k * base.norms[i], 1e-12));
            prop_assert!(oracle::close(s.variances[i], k * k * base.variances[i], 1e-12));
        }
        let mut t2 = t.clone();
        t2.hidden_states = scaled;
        let (a, b) = (features(&t).get("circuit_complexity"), features(&t2).get("circuit_complexity"));
        prop_assert!((b - k.powi(3) * a).abs() <= 1e-6 * (k.powi(3) * a).abs().max(1e-12));
    }

    #[test]
    fn entropy_shift(seed in any::<u64>(), shift in 0.0f64..2.0) {
        let t = seeded(seed);
        let mut t2 = t.clone();
        t2.entropy.iter_mut().for_each(|h| *h += shift);
        let (a, b) = (features(&t), features(&t2));
        prop_assert!((b.get("entropy_change") - a.get("entropy_change")).abs() < 1e-12);
        prop_assert!((b.get("mean_entropy") - a.get("mean_entropy") - shift).abs() < 1e-12);
    }
}
