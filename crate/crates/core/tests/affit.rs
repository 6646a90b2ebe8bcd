use pagrowth::affit::{
    compare_af, fit_af_with, log_linear_ols, loglinearity_score_with, AfFamily, SegmentOptions, Weighting,
};
use pagrowth::rate::{BinnedPoint, BinnedRate};
use proptest::prelude::*;

fn binned(points: &[(u64, f64, u64)]) -> BinnedRate<f64> {
    BinnedRate {
        points: points
            .iter()
            .map(|&(k, a_hat, events)| BinnedPoint { k, a_hat, support: events, events })
            .collect(),
        half_width: 0.025,
    }
}

fn noisy_curve() -> impl Strategy<Value = Vec<(u64, f64, u64)>> {
    (0.2f64..1.8, proptest::collection::vec((-0.3f64..0.3, 1u64..500), 12..60)).prop_map(|(alpha, noise)| {
        let mut k = 0u64;
        noise
            .into_iter()
            .map(|(e, w)| {
                let p = (k, 2.0 * ((k + 1) as f64).powf(alpha) * e.exp(), w);
                k += 1 + k / 4;
                p
            })
            .collect()
    })
}

#[test]
fn weighted_ols_matches_normal_equations() {
    let pts: Vec<_> = (0..30u64)
        .map(|k| (k * 3, ((k * 3 + 1) as f64).powf(0.8) * (1.0 + 0.2 * ((k as f64) * 1.7).sin()), 1 + (k * 37) % 11))
        .collect();
    let b = binned(&pts);
    for weighting in [Weighting::Equal, Weighting::Events] {
        let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(k, a, e) in &pts {
            let w = if weighting == Weighting::Events { e as f64 } else { 1.0 };
            let (x, y) = (((k + 1) as f64).ln(), a.ln());
            sw += w;
            sx += w * x;
            sy += w * y;
            sxx += w * x * x;
            sxy += w * x * y;
        }
        let slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
        let c = ((sy - slope * sx) / sw).exp();
        let (alpha, scale) = log_linear_ols(&b, weighting).unwrap();
        assert!((alpha - slope).abs() < 1e-9, "{weighting:?}: {alpha} vs {slope}");
        assert!((scale / c - 1.0).abs() < 1e-9);
        // The profile fit works on the raw scale, so it only approximately agrees.
        let fit = fit_af_with(&b, AfFamily::LogLinear, weighting).unwrap();
        assert!((fit.shape - slope).abs() < 0.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fits_are_invariant_to_rescaling(pts in noisy_curve(), c in 1e-3f64..1e3) {
        let b0 = binned(&pts);
        let scaled: Vec<_> = pts.iter().map(|&(k, a, e)| (k, a * c, e)).collect();
        let b1 = binned(&scaled);
        for family in AfFamily::ALL {
            let f0 = fit_af_with(&b0, family, Weighting::Events).unwrap();
            let f1 = fit_af_with(&b1, family, Weighting::Events).unwrap();
            prop_assert!((f0.shape - f1.shape).abs() <= 1e-6 * f0.shape.abs().max(1.0), "{:?}: {} vs {}", family, f0.shape, f1.shape);
            prop_assert!((f1.scale / (c * f0.scale) - 1.0).abs() < 1e-6);
            // Residuals live in log space, so rescaling only moves ln c.
            if f0.rss > 1e-12 {
                prop_assert!((f1.aic - f0.aic).abs() < 1e-6 * f0.aic.abs().max(1.0));
            }
        }
        let opts = SegmentOptions::default();
        let s0 = loglinearity_score_with(&b0, &opts).unwrap();
        let s1 = loglinearity_score_with(&b1, &opts).unwrap();
        prop_assert_eq!(&s0.breakpoints, &s1.breakpoints);
        prop_assert!((s0.score - s1.score).abs() < 1e-12);
    }

    #[test]
    fn ranking_orders_by_aic(pts in noisy_curve()) {
        let b = binned(&pts);
        let fits: Vec<_> = AfFamily::ALL.iter().map(|&f| fit_af_with(&b, f, Weighting::Events).unwrap()).collect();
        let r = compare_af(&fits).unwrap();
        prop_assert!(r.by_aic.windows(2).all(|w| w[0].1 <= w[1].1));
        prop_assert_eq!(r.aic_winner, r.by_aic[0].0);
    }
}
