//! Attachment-function fits on binned rates and the log-linearity score.
//!
//! Both families are fitted by least squares on `ln Â` with a free
//! multiplicative scale, so for a fixed shape the best scale is the
//! (weighted) geometric mean of `Â / A(k)` and only the shape needs a
//! numerical search.
//!
//! Bins are weighted by the number of attachment events behind them by
//! default. The variance of `ln Â` in a bin is roughly the reciprocal of
//! that count, and at high `k` many bins rest on one or two events.
//! Weights are rescaled to sum to the number of bins, so RSS, AIC and BIC
//! reduce to the unweighted formulas under [`Weighting::Equal`].

use std::hash::{Hash, Hasher};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::optim::scan_brent;
use crate::rate::BinnedRate;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfFamily {
    /// `A(k) = (k + 1)^α`
    LogLinear,
    /// `A(k) = (k + 1) / (1 + β ln(k + 1))`
    Nonlinear,
}

impl AfFamily {
    pub const ALL: [AfFamily; 2] = [AfFamily::LogLinear, AfFamily::Nonlinear];

    pub fn name(self) -> &'static str {
        match self {
            AfFamily::LogLinear => "log_linear",
            AfFamily::Nonlinear => "nonlinear",
        }
    }

    fn ln_a<F: Real>(self, shape: F, x: F) -> F {
        // x = ln(k + 1)
        match self {
            AfFamily::LogLinear => shape * x,
            AfFamily::Nonlinear => x - (F::one() + shape * x).ln(),
        }
    }

    fn shape_range<F: Real>(self) -> (F, F) {
        match self {
            AfFamily::LogLinear => (F::lit(-3.0), F::lit(5.0)),
            // searched as ln β
            AfFamily::Nonlinear => (F::lit(-14.0), F::lit(12.0)),
        }
    }
}

impl std::str::FromStr for AfFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_linear" | "krapivsky" => Ok(AfFamily::LogLinear),
            "nonlinear" | "redner" => Ok(AfFamily::Nonlinear),
            _ => Err(Error::Config(format!("unknown attachment family '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// One unit of weight per bin.
    Equal,
    /// Weight proportional to the attachment events pooled in the bin.
    #[default]
    Events,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(Weighting::Equal),
            "events" => Ok(Weighting::Events),
            _ => Err(Error::Config(format!("unknown weighting '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentFunctionFit<F> {
    pub family: AfFamily,
    /// `α` for log-linear, `β` for nonlinear.
    pub shape: F,
    pub scale: F,
    pub rss: F,
    pub aic: F,
    pub bic: F,
    pub n_points: usize,
    pub weighting: Weighting,
    pub half_width: F,
    pub k_min: u64,
    pub k_max: u64,
    /// Hash of the bins the fit used; fits are only comparable when equal.
    pub data_digest: u64,
}

impl<F: Real> AttachmentFunctionFit<F> {
    pub fn eval(&self, k: u64) -> F {
        let x = F::from_count(k + 1).ln();
        self.scale * self.family.ln_a(self.shape, x).exp()
    }

    /// `k,a_hat,a_fit` on the bin grid.
    pub fn write_overlay_csv<W: Write>(&self, binned: &BinnedRate<F>, mut out: W) -> Result<()> {
        writeln!(out, "k,a_hat,a_fit")?;
        for p in &binned.points {
            writeln!(out, "{},{},{}", p.k, p.a_hat, self.eval(p.k))?;
        }
        Ok(())
    }
}

/// Bins with positive `Â`, as `(k, ln(k + 1), ln Â)` with weights that
/// sum to the number of bins.
struct LogData<F> {
    k: Vec<u64>,
    x: Vec<F>,
    y: Vec<F>,
    w: Vec<F>,
    digest: u64,
}

impl<F: Real> LogData<F> {
    fn new(binned: &BinnedRate<F>, weighting: Weighting, min_points: usize) -> Result<Self> {
        let mut k = Vec::new();
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut w = Vec::new();
        let mut h = std::collections::hash_map::DefaultHasher::new();
        weighting.hash(&mut h);
        for p in &binned.points {
            if p.a_hat > F::zero() && p.a_hat.is_finite() {
                k.push(p.k);
                x.push(F::from_count(p.k + 1).ln());
                y.push(p.a_hat.ln());
                w.push(match weighting {
                    Weighting::Equal => F::one(),
                    Weighting::Events => F::from_count(p.events.max(1)),
                });
                p.k.hash(&mut h);
                p.a_hat.as_f64().to_bits().hash(&mut h);
                p.events.hash(&mut h);
            }
        }
        if k.len() < min_points {
            return Err(Error::Fit(format!(
                "{} bins with positive rate; at least {min_points} are required",
                k.len()
            )));
        }
        let scale = F::from_count(k.len() as u64) / w.iter().copied().sum::<F>();
        for v in &mut w {
            *v = *v * scale;
        }
        Ok(Self { k, x, y, w, digest: h.finish() })
    }

    fn n(&self) -> usize {
        self.k.len()
    }

    /// Residual sum of squares and log-scale for a fixed shape.
    fn profile(&self, family: AfFamily, shape: F) -> (F, F) {
        let n = F::from_count(self.n() as u64);
        let r: Vec<F> = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(&x, &y)| y - family.ln_a(shape, x))
            .collect();
        let mean = r.iter().zip(&self.w).map(|(&v, &w)| v * w).sum::<F>() / n;
        let rss = r
            .iter()
            .zip(&self.w)
            .map(|(&v, &w)| w * (v - mean) * (v - mean))
            .sum::<F>();
        (if rss.is_nan() { F::infinity() } else { rss }, mean)
    }
}

fn information_criteria<F: Real>(rss: F, n: usize, p: usize) -> (F, F) {
    let nf = F::from_count(n as u64);
    let pf = F::from_count(p as u64);
    // An exact fit would give ln 0; floor the mean square at the smallest
    // positive normal so both criteria stay finite.
    let ln_ms = (rss / nf).max(F::min_positive_value()).ln();
    (nf * ln_ms + F::lit(2.0) * pf, nf * ln_ms + pf * nf.ln())
}

/// Least-squares fit of `ln Â ≈ ln c + ln A(k; θ)` over bins with `Â > 0`,
/// event-weighted.
pub fn fit_af<F: Real>(binned: &BinnedRate<F>, family: AfFamily) -> Result<AttachmentFunctionFit<F>> {
    fit_af_with(binned, family, Weighting::default())
}

pub fn fit_af_with<F: Real>(
    binned: &BinnedRate<F>,
    family: AfFamily,
    weighting: Weighting,
) -> Result<AttachmentFunctionFit<F>> {
    let data = LogData::new(binned, weighting, 3)?;
    let (lo, hi) = family.shape_range::<F>();
    let tol = F::lit(1e-13);
    let (shape, rss) = match family {
        AfFamily::LogLinear => {
            let m = scan_brent(|a| data.profile(family, a).0, lo, hi, 161, tol);
            (m.x, m.value)
        }
        AfFamily::Nonlinear => {
            let m = scan_brent(|u: F| data.profile(family, u.exp()).0, lo, hi, 209, tol);
            let at_zero = data.profile(family, F::zero()).0;
            if at_zero <= m.value {
                (F::zero(), at_zero)
            } else {
                (m.x.exp(), m.value)
            }
        }
    };
    if !rss.is_finite() {
        return Err(Error::Numeric(format!("{} fit diverged", family.name())));
    }
    let (_, ln_c) = data.profile(family, shape);
    let (aic, bic) = information_criteria(rss, data.n(), 2);
    Ok(AttachmentFunctionFit {
        family,
        shape,
        scale: ln_c.exp(),
        rss,
        aic,
        bic,
        n_points: data.n(),
        weighting,
        half_width: binned.half_width,
        k_min: data.k[0],
        k_max: *data.k.last().unwrap(),
        data_digest: data.digest,
    })
}

/// Closed-form (weighted) least squares of `ln Â` on `ln(k + 1)`. Returns
/// `(α, c)`.
pub fn log_linear_ols<F: Real>(binned: &BinnedRate<F>, weighting: Weighting) -> Result<(F, F)> {
    let data = LogData::new(binned, weighting, 3)?;
    let n = F::from_count(data.n() as u64);
    let w = &data.w;
    let mx = data.x.iter().zip(w).map(|(&x, &w)| w * x).sum::<F>() / n;
    let my = data.y.iter().zip(w).map(|(&y, &w)| w * y).sum::<F>() / n;
    let sxy: F = (0..data.n()).map(|i| w[i] * (data.x[i] - mx) * (data.y[i] - my)).sum();
    let sxx: F = (0..data.n()).map(|i| w[i] * (data.x[i] - mx) * (data.x[i] - mx)).sum();
    let alpha = sxy / sxx;
    Ok((alpha, (my - alpha * mx).exp()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfRanking<F> {
    /// Fits ordered by increasing AIC.
    pub by_aic: Vec<(AfFamily, F, F)>,
    pub aic_winner: AfFamily,
    pub bic_winner: AfFamily,
}

pub fn compare_af<F: Real>(fits: &[AttachmentFunctionFit<F>]) -> Result<AfRanking<F>> {
    let Some(first) = fits.first() else {
        return Err(Error::Config("no fits to compare".into()));
    };
    if fits
        .iter()
        .any(|f| f.data_digest != first.data_digest || f.n_points != first.n_points || f.weighting != first.weighting)
    {
        return Err(Error::Fit("fits were made on different binned data".into()));
    }
    let mut by_aic: Vec<(AfFamily, F, F)> = fits.iter().map(|f| (f.family, f.aic, f.bic)).collect();
    by_aic.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let bic_winner = fits
        .iter()
        .min_by(|a, b| a.bic.partial_cmp(&b.bic).unwrap())
        .unwrap()
        .family;
    Ok(AfRanking { aic_winner: by_aic[0].0, by_aic, bic_winner })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment<F> {
    pub k_start: u64,
    pub k_end: u64,
    /// Slope of `ln Â` against `ln(k + 1)`.
    pub slope: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLinearityScore<F> {
    pub breakpoints: Vec<u64>,
    pub segments: Vec<Segment<F>>,
    /// `log10` of the `k` extent of the longest segment.
    pub score: F,
    /// `log10((k_end + 1) / (k_start + 1))` of the segment longest in log
    /// space.
    pub log_extent_score: F,
    pub gcv: F,
    pub rss: F,
}

#[derive(Debug, Clone, Copy)]
pub struct SegmentOptions {
    pub max_segments: usize,
    pub weighting: Weighting,
    /// GCV cost per knot.
    pub penalty: f64,
    pub max_candidates: usize,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self { max_segments: 5, weighting: Weighting::default(), penalty: 3.0, max_candidates: 200 }
    }
}

/// Weighted least squares on the columns `1, x, (x − t_j)₊`. `sw` holds
/// square roots of the weights. Returns the coefficients and the weighted
/// residual sum of squares.
fn hinge_lsq<F: Real>(x: &[F], y: &[F], sw: &[F], knots: &[F]) -> Option<(Vec<F>, F)> {
    let n = x.len();
    let p = knots.len() + 2;
    let mut cols: Vec<Vec<F>> = Vec::with_capacity(p);
    cols.push(sw.to_vec());
    cols.push(x.iter().zip(sw).map(|(&v, &s)| v * s).collect());
    for &t in knots {
        cols.push(x.iter().zip(sw).map(|(&v, &s)| (v - t).max(F::zero()) * s).collect());
    }
    // Modified Gram–Schmidt.
    let mut r = vec![vec![F::zero(); p]; p];
    let mut q = cols;
    for j in 0..p {
        for i in 0..j {
            let d: F = q[i].iter().zip(&q[j]).map(|(&a, &b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            for (v, a) in q[j].iter_mut().zip(&qi) {
                *v = *v - d * *a;
            }
        }
        let norm = q[j].iter().map(|&v| v * v).sum::<F>().sqrt();
        if !(norm > F::lit(1e-12) * F::from_count(n as u64).sqrt()) {
            return None;
        }
        r[j][j] = norm;
        for v in q[j].iter_mut() {
            *v = *v / norm;
        }
    }
    let qty: Vec<F> = q
        .iter()
        .map(|c| c.iter().zip(y).zip(sw).map(|((&a, &b), &s)| a * b * s).sum())
        .collect();
    let mut beta = vec![F::zero(); p];
    for j in (0..p).rev() {
        let s: F = (j + 1..p).map(|i| r[j][i] * beta[i]).sum();
        beta[j] = (qty[j] - s) / r[j][j];
    }
    let rss = (0..n)
        .map(|i| {
            let mut f = beta[0] + beta[1] * x[i];
            for (b, &t) in beta[2..].iter().zip(knots) {
                f = f + *b * (x[i] - t).max(F::zero());
            }
            let r = (y[i] - f) * sw[i];
            r * r
        })
        .sum();
    Some((beta, rss))
}

fn gcv<F: Real>(rss: F, n: usize, n_terms: usize, penalty: F) -> F {
    let nf = F::from_count(n as u64);
    let terms = F::from_count(n_terms as u64);
    let c = terms + penalty * (terms - F::one()) / F::lit(2.0);
    if c >= nf {
        return F::infinity();
    }
    let d = F::one() - c / nf;
    rss / nf / (d * d)
}

/// Segmented regression of `ln Â` on `ln(k + 1)` by greedy knot insertion,
/// with the number of knots chosen by generalised cross-validation.
pub fn loglinearity_score<F: Real>(binned: &BinnedRate<F>, max_segments: usize) -> Result<LogLinearityScore<F>> {
    loglinearity_score_with(binned, &SegmentOptions { max_segments, ..SegmentOptions::default() })
}

pub fn loglinearity_score_with<F: Real>(
    binned: &BinnedRate<F>,
    options: &SegmentOptions,
) -> Result<LogLinearityScore<F>> {
    if options.max_segments == 0 {
        return Err(Error::Config("max_segments must be at least 1".into()));
    }
    let data = LogData::new(binned, options.weighting, (2 * options.max_segments).max(3))?;
    let n = data.n();
    let penalty = F::lit(options.penalty);
    let sw: Vec<F> = data.w.iter().map(|w| w.sqrt()).collect();

    // Knots at observed bins, leaving two bins beyond each end.
    let interior: Vec<usize> = (2..n.saturating_sub(2)).collect();
    let stride = interior.len().div_ceil(options.max_candidates.max(1)).max(1);
    let candidates: Vec<usize> = interior.into_iter().step_by(stride).collect();

    let (_, rss0) = hinge_lsq(&data.x, &data.y, &sw, &[])
        .ok_or_else(|| Error::Fit("bins do not span a range of k".into()))?;
    let mut chosen: Vec<usize> = Vec::new();
    let mut best = (Vec::new(), gcv(rss0, n, 2, penalty), rss0);
    let tss: F = {
        let m = data.y.iter().zip(&data.w).map(|(&v, &w)| v * w).sum::<F>() / F::from_count(n as u64);
        data.y.iter().zip(&data.w).map(|(&v, &w)| w * (v - m) * (v - m)).sum()
    };
    let slack = F::lit(1e-12) * tss / F::from_count(n as u64);

    while chosen.len() + 1 < options.max_segments {
        let mut step: Option<(usize, F)> = None;
        for &c in &candidates {
            if chosen.iter().any(|&k| k.abs_diff(c) < 2) {
                continue;
            }
            let mut knots: Vec<F> = chosen.iter().map(|&i| data.x[i]).collect();
            knots.push(data.x[c]);
            if let Some((_, rss)) = hinge_lsq(&data.x, &data.y, &sw, &knots) {
                if step.is_none_or(|s| rss < s.1) {
                    step = Some((c, rss));
                }
            }
        }
        let Some((c, rss)) = step else { break };
        chosen.push(c);
        let g = gcv(rss, n, chosen.len() + 2, penalty);
        if g < best.1 - slack {
            best = (chosen.clone(), g, rss);
        }
    }

    let (mut knots_idx, gcv_best, rss) = best;
    knots_idx.sort_unstable();
    let knots: Vec<F> = knots_idx.iter().map(|&i| data.x[i]).collect();
    let (beta, _) = hinge_lsq(&data.x, &data.y, &sw, &knots).expect("refit of selected model");

    let mut bounds = vec![0usize];
    bounds.extend(&knots_idx);
    bounds.push(n - 1);
    let mut slope = beta[1];
    let mut segments = Vec::with_capacity(bounds.len() - 1);
    for (j, w) in bounds.windows(2).enumerate() {
        if j > 0 {
            slope = slope + beta[j + 1];
        }
        segments.push(Segment { k_start: data.k[w[0]], k_end: data.k[w[1]], slope });
    }
    let extent = segments.iter().map(|s| s.k_end - s.k_start).max().unwrap();
    let log_extent = segments
        .iter()
        .map(|s| (F::from_count(s.k_end + 1) / F::from_count(s.k_start + 1)).log10())
        .fold(F::zero(), F::max);
    Ok(LogLinearityScore {
        breakpoints: knots_idx.iter().map(|&i| data.k[i]).collect(),
        segments,
        score: F::from_count(extent).log10(),
        log_extent_score: log_extent,
        gcv: gcv_best,
        rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn binned(f: impl Fn(u64) -> f64, ks: impl IntoIterator<Item = u64>) -> BinnedRate<f64> {
        BinnedRate::from_pairs(ks.into_iter().map(|k| (k, f(k))))
    }

    #[test]
    fn noiseless_log_linear_is_exact() {
        let b = binned(|k| 2.0 * ((k + 1) as f64).powf(0.7), (0..50).map(|i| i * 7));
        let fit = fit_af(&b, AfFamily::LogLinear).unwrap();
        assert!((fit.shape - 0.7).abs() < 1e-9);
        assert!((fit.scale - 2.0).abs() < 1e-9);
        assert!(fit.rss < 1e-9);
        assert!(fit.aic.is_finite() && fit.bic.is_finite());
        assert_eq!(fit.n_points, 50);
    }

    #[test]
    fn noiseless_nonlinear_is_recovered() {
        let a = |k: u64| {
            let x = ((k + 1) as f64).ln();
            3.0 * (k + 1) as f64 / (1.0 + 0.8 * x)
        };
        let b = binned(a, (0..60).map(|i| i * i));
        let fit = fit_af(&b, AfFamily::Nonlinear).unwrap();
        assert_relative_eq!(fit.shape, 0.8, max_relative = 1e-7);
        assert_relative_eq!(fit.scale, 3.0, max_relative = 1e-7);
        let ll = fit_af(&b, AfFamily::LogLinear).unwrap();
        let r = compare_af(&[ll, fit]).unwrap();
        assert_eq!(r.aic_winner, AfFamily::Nonlinear);
        assert_eq!(r.bic_winner, AfFamily::Nonlinear);
    }

    #[test]
    fn optimizer_matches_ols() {
        let mut state = 17u64;
        let mut noise = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.4
        };
        let b = BinnedRate::from_pairs((0..200u64).map(|k| (k, ((k + 1) as f64).powf(1.1) * noise().exp())));
        let fit = fit_af(&b, AfFamily::LogLinear).unwrap();
        let (alpha, c) = log_linear_ols(&b, Weighting::Events).unwrap();
        assert!((fit.shape - alpha).abs() < 1e-8, "{} vs {}", fit.shape, alpha);
        assert_relative_eq!(fit.scale, c, max_relative = 1e-8);
    }

    #[test]
    fn nonpositive_bins_are_dropped() {
        let mut b = binned(|k| (k + 1) as f64, 0..4);
        b.points[1].a_hat = 0.0;
        b.points[3].a_hat = -1.0;
        assert!(matches!(fit_af(&b, AfFamily::LogLinear), Err(Error::Fit(_))));
        b.points[3].a_hat = 4.0;
        assert_eq!(fit_af(&b, AfFamily::LogLinear).unwrap().n_points, 3);
    }

    #[test]
    fn ranking_requires_same_data() {
        let a = fit_af(&binned(|k| (k + 1) as f64, 0..10), AfFamily::LogLinear).unwrap();
        let b = fit_af(&binned(|k| (k + 2) as f64, 0..10), AfFamily::Nonlinear).unwrap();
        assert!(compare_af(&[a.clone(), b]).is_err());
        let single = compare_af(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.by_aic.len(), 1);
        assert_eq!(single.aic_winner, AfFamily::LogLinear);
    }

    #[test]
    fn straight_line_has_one_segment() {
        let b = binned(|k| 0.5 * ((k + 1) as f64).powf(1.3), 3..400);
        let s = loglinearity_score(&b, 5).unwrap();
        assert_eq!(s.segments.len(), 1);
        assert!(s.breakpoints.is_empty());
        assert_relative_eq!(s.score, (399.0f64 - 3.0).log10(), max_relative = 1e-12);
    }

    #[test]
    fn two_slopes_breakpoint_is_found() {
        let a = |k: u64| {
            let x = ((k + 1) as f64).ln();
            let t = 51f64.ln();
            (1.0 * x + 0.8 * (x - t).max(0.0)).exp()
        };
        let ks: Vec<u64> = (0..80).map(|i| (1.08f64.powi(i) as u64).max(i as u64)).collect();
        let mut ks = ks;
        ks.dedup();
        let s = loglinearity_score(&binned(a, ks), 5).unwrap();
        assert_eq!(s.breakpoints.len(), 1, "{s:?}");
        let bp = s.breakpoints[0] as f64;
        assert!((45.0..=55.0).contains(&bp), "{bp}");
        assert_relative_eq!(s.segments[1].slope, 1.8, max_relative = 1e-6);
    }

    #[test]
    fn too_few_bins() {
        let b = binned(|k| (k + 1) as f64, 0..9);
        assert!(loglinearity_score(&b, 5).is_err());
    }
}
