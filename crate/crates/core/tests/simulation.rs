use pagrowth::netsim::{simulate, simulate_detailed, AttachmentFunction, EdgesPerStep, GrowthMode, ModelConfig};
use pagrowth::rng;
use pagrowth::sampler::DegreeClassSampler;
use pagrowth::timeline::DegreeHistogram;
use proptest::prelude::*;

fn attachment() -> impl Strategy<Value = AttachmentFunction<f64>> {
    prop_oneof![
        Just(AttachmentFunction::Linear),
        Just(AttachmentFunction::Uniform),
        (0.0f64..2.0).prop_map(|alpha| AttachmentFunction::LogLinear { alpha }),
        (0.0f64..3.0).prop_map(|beta| AttachmentFunction::Nonlinear { beta }),
    ]
}

#[test]
fn sampler_matches_target_distribution() {
    let degrees = [0u64, 0, 1, 3, 3, 7, 0, 12, 2, 1, 5, 0, 0, 9, 4, 1, 30, 2, 0, 6];
    for attachment in [
        AttachmentFunction::Linear,
        AttachmentFunction::LogLinear { alpha: 0.6 },
        AttachmentFunction::Nonlinear { beta: 1.0 },
    ] {
        let mut s = DegreeClassSampler::<f64>::new(attachment);
        for &k in &degrees {
            s.push_node(k);
        }
        let draws = 200_000;
        let mut counts = vec![0u64; degrees.len()];
        let mut r = rng::stream(11, 0);
        for _ in 0..draws {
            counts[s.sample(&mut r).unwrap() as usize] += 1;
        }
        let total: f64 = degrees.iter().map(|&k| attachment.eval(k)).sum();
        for (i, &k) in degrees.iter().enumerate() {
            let p = attachment.eval(k) / total;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = counts[i] as f64 / draws as f64;
            assert!((freq - p).abs() <= 3.0 * se, "{attachment:?} node {i}: {freq} vs {p}");
        }
    }
}

#[test]
fn log_linear_one_is_linear() {
    for seed in [1u64, 2, 3] {
        let a = simulate(&ModelConfig::price(AttachmentFunction::<f64>::Linear, 2, 3_000, seed)).unwrap();
        let b = simulate(&ModelConfig::price(AttachmentFunction::LogLinear { alpha: 1.0 }, 2, 3_000, seed)).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn incremental_state_matches_recomputation(
        attachment in attachment(),
        steps in 2u64..800,
        m in 1u32..4,
        uniform_m in any::<bool>(),
        n1 in 1u32..6,
        seed in any::<u64>(),
    ) {
        let mut cfg = ModelConfig::price(attachment, m, steps, seed);
        cfg.n1 = n1;
        cfg.m1_prime = if n1 > 1 { 3 } else { 0 };
        if uniform_m {
            cfg.edges_per_step = EdgesPerStep::Uniform { m };
        }
        let sim = simulate_detailed(&cfg).unwrap();
        let seq = &sim.sequence;
        let degrees: Vec<u64> = seq.in_degrees_at(seq.steps()).unwrap();
        let hist = DegreeHistogram::from_degrees(degrees.iter().copied());
        prop_assert_eq!(hist.total_degree(), sim.edges_placed);
        prop_assert_eq!(seq.edge_count() as u64, sim.edges_placed);

        let s = &sim.sampler;
        for (node, &k) in degrees.iter().enumerate() {
            prop_assert_eq!(s.degree(node as u32), k);
        }
        let counts = s.class_counts();
        for (k, c) in hist.iter() {
            prop_assert_eq!(counts[k as usize], c);
        }
        let fresh = s.recomputed_total();
        prop_assert!((s.total_weight() - fresh).abs() <= 1e-9 * fresh);
        for (k, &n) in counts.iter().enumerate() {
            let w = n as f64 * attachment.eval(k as u64);
            prop_assert!((s.class_weight(k as u64) - w).abs() <= 1e-9 * fresh.max(1.0));
        }
    }

    #[test]
    fn jeong_mode_has_two_steps(n1 in 1u32..40, n2 in 1u32..20, m in 1u32..30, seed in any::<u64>()) {
        let mut cfg = ModelConfig::price(AttachmentFunction::<f64>::Linear, m, 2, seed);
        cfg.n1 = n1;
        cfg.mode = GrowthMode::Jeong { n2 };
        let seq = simulate(&cfg).unwrap();
        prop_assert_eq!(seq.steps(), 2);
        prop_assert_eq!(seq.step(2).n(), n2 as usize);
        prop_assert_eq!(seq.step(2).m(), m as usize);
    }
}
