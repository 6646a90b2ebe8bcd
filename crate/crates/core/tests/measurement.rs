use pagrowth::affit::{fit_af, fit_af_with, loglinearity_score, AfFamily, Weighting};
use pagrowth::netsim::{simulate, AttachmentFunction, ModelConfig};
use pagrowth::rate::{
    accumulate, bin_rate, jeong_rate, newman_rate, newman_rate_with, windowed_alpha, NewmanOptions, NewmanVariant,
    StepWindow, DEFAULT_HALF_WIDTH,
};
use pagrowth::timeline::{GrowthSequence, Resolution, SequenceBuilder};
use proptest::prelude::*;

fn bi_epochal() -> impl Strategy<Value = GrowthSequence> {
    (1u32..25, 1usize..10)
        .prop_flat_map(|(n1, n2)| {
            let intra = proptest::collection::vec((0..n1, 0..n1), 0..60);
            let cross = proptest::collection::vec((0..n2 as u32, 0..n1), 0..40);
            (Just(n1), Just(n2), intra, cross)
        })
        .prop_map(|(n1, n2, intra, cross)| {
            let mut b = SequenceBuilder::new(Resolution::Synthetic);
            let intra: Vec<_> = intra.into_iter().filter(|(a, c)| a != c).collect();
            b.push_step(n1 as usize, &[], &intra).unwrap();
            let cross: Vec<_> = cross.into_iter().map(|(s, d)| (n1 + s, d)).collect();
            b.push_step(n2, &cross, &[]).unwrap();
            b.finish().unwrap()
        })
}

fn recovered(attachment: AttachmentFunction<f64>, family: AfFamily, seed: u64) -> f64 {
    let seq = simulate(&ModelConfig::price(attachment, 1, 100_000, seed)).unwrap();
    let est = newman_rate::<f64>(&seq, NewmanVariant::Corrected).unwrap();
    fit_af(&bin_rate(&est, DEFAULT_HALF_WIDTH).unwrap(), family).unwrap().shape
}

#[test]
fn corrected_estimate_recovers_generating_shape() {
    let alpha = recovered(AttachmentFunction::Uniform, AfFamily::LogLinear, 21);
    assert!(alpha.abs() <= 0.05, "uniform: α̂ = {alpha}");
    let alpha = recovered(AttachmentFunction::Linear, AfFamily::LogLinear, 22);
    assert!((alpha - 1.0).abs() <= 0.05, "linear: α̂ = {alpha}");
    let alpha = recovered(AttachmentFunction::LogLinear { alpha: 0.5 }, AfFamily::LogLinear, 23);
    assert!((alpha - 0.5).abs() <= 0.05, "log-linear 0.5: α̂ = {alpha}");
    let beta = recovered(AttachmentFunction::Nonlinear { beta: 1.0 }, AfFamily::Nonlinear, 24);
    assert!((beta - 1.0).abs() <= 0.1, "nonlinear: β̂ = {beta}");
}

#[test]
fn rescaling_the_normalisation_leaves_shapes_unchanged() {
    let seq = simulate(&ModelConfig::price(AttachmentFunction::Nonlinear { beta: 0.7 }, 2, 20_000, 5)).unwrap();
    let base = newman_rate::<f64>(&seq, NewmanVariant::Corrected).unwrap();
    let scaled = newman_rate_with::<f64>(&seq, &NewmanOptions { scale: 37.5, ..Default::default() }).unwrap();
    let (b0, b1) = (bin_rate(&base, 0.025).unwrap(), bin_rate(&scaled, 0.025).unwrap());
    for family in AfFamily::ALL {
        let (f0, f1) = (fit_af(&b0, family).unwrap(), fit_af(&b1, family).unwrap());
        assert!((f0.shape - f1.shape).abs() <= 1e-6 * f0.shape.abs().max(1.0), "{family:?}");
        assert!((f1.scale / f0.scale - 37.5).abs() < 1e-6);
        assert!((f0.aic - f1.aic).abs() < 1e-6);
    }
    let (s0, s1) = (loglinearity_score(&b0, 5).unwrap(), loglinearity_score(&b1, 5).unwrap());
    assert_eq!(s0.breakpoints, s1.breakpoints);
    assert_eq!(s0.score, s1.score);
}

#[test]
fn windowed_halves_of_linear_growth() {
    let seq = simulate(&ModelConfig::price(AttachmentFunction::<f64>::Linear, 1, 100_000, 31)).unwrap();
    let half = seq.steps() / 2 + 1;
    let w = [
        StepWindow::Steps { start: 1, end: half },
        StepWindow::Steps { start: half, end: seq.steps() + 1 },
    ];
    let got = windowed_alpha::<f64>(&seq, &w).unwrap();
    assert_eq!(got.len(), 2);
    for g in &got {
        assert!((g.alpha - 1.0).abs() <= 0.05, "{g:?}");
    }

    let all = windowed_alpha::<f64>(&seq, &[StepWindow::Steps { start: 1, end: seq.steps() + 1 }]).unwrap();
    let plain = fit_af(
        &bin_rate(&newman_rate::<f64>(&seq, NewmanVariant::Corrected).unwrap(), DEFAULT_HALF_WIDTH).unwrap(),
        AfFamily::LogLinear,
    )
    .unwrap();
    assert_eq!(all[0].alpha, plain.shape);
}

#[test]
fn nested_model_is_not_systematically_beaten() {
    let mut gap = 0.0;
    let reps = 20;
    for seed in 0..reps {
        let seq = simulate(&ModelConfig::price(AttachmentFunction::<f64>::LogLinear { alpha: 1.0 }, 1, 20_000, 900 + seed)).unwrap();
        let b = bin_rate(&newman_rate::<f64>(&seq, NewmanVariant::Corrected).unwrap(), DEFAULT_HALF_WIDTH).unwrap();
        let ll = fit_af_with(&b, AfFamily::LogLinear, Weighting::Events).unwrap();
        let nl = fit_af_with(&b, AfFamily::Nonlinear, Weighting::Events).unwrap();
        gap += ll.aic - nl.aic;
    }
    assert!(gap / reps as f64 <= 2.0, "mean AIC gap {}", gap / reps as f64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn newman_reduces_to_jeong(seq in bi_epochal()) {
        let j = jeong_rate::<f64>(&seq).unwrap();
        let n = newman_rate::<f64>(&seq, NewmanVariant::Corrected).unwrap();
        prop_assert_eq!(j.points.len(), n.points.len());
        for (a, b) in j.points.iter().zip(&n.points) {
            prop_assert_eq!(a.k, b.k);
            prop_assert_eq!(a.a_hat.to_bits(), b.a_hat.to_bits());
            prop_assert_eq!(a.events, b.events);
        }
    }

    #[test]
    fn every_measured_edge_is_accounted(steps in 2u64..2_000, m in 1u32..4, seed in any::<u64>()) {
        let seq = simulate(&ModelConfig::price(AttachmentFunction::<f64>::LogLinear { alpha: 0.8 }, m, steps, seed)).unwrap();
        let est = newman_rate::<f64>(&seq, NewmanVariant::Corrected).unwrap();
        let measured: u64 = seq.iter_steps().skip(1).map(|s| s.m() as u64).sum();
        prop_assert_eq!(est.points.iter().map(|p| p.events).sum::<u64>(), measured);
        prop_assert_eq!(est.edges_measured, measured);
        let acc = accumulate::<f64>(&seq, None);
        for p in &est.points {
            prop_assert!(acc.weight[p.k as usize] > 0);
            prop_assert!(p.a_hat > 0.0);
        }
        prop_assert!(est.points.windows(2).all(|w| w[0].k < w[1].k));
    }
}
