//! Fitting discretised heavy-tailed forms to in-degree distributions.
//!
//! Data are handled on the shifted scale `x = k + 1`, so `k_min = 1` means
//! the full domain including uncited nodes. For a given `k_min` each family
//! is fitted by maximum likelihood on `x ≥ k_min`; `k_min` itself can be
//! chosen by minimising the KS distance, or as the smallest value whose
//! bootstrap p-value reaches a significance level. Goodness of fit uses a
//! semi-parametric bootstrap: synthetic datasets draw the tail from the
//! fitted model and the body by resampling the observed values below
//! `k_min`.

mod model;
mod sample;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use model::{DistributionModel, Family};
pub use sample::ModelSampler;

use crate::optim::{brent, nelder_mead};
use crate::rng;
use crate::timeline::DegreeHistogram;
use crate::{Error, Real, Result};

pub const DEFAULT_MIN_TAIL: u64 = 10;
pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const PLAUSIBILITY_LEVEL: f64 = 0.10;

/// Observed values `x = k + 1` with multiplicities, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct TailData {
    pub xmin: u64,
    pub values: Vec<(u64, u64)>,
    pub n: u64,
}

impl TailData {
    pub fn from_histogram(hist: &DegreeHistogram, xmin: u64) -> Self {
        let values: Vec<(u64, u64)> = hist
            .iter()
            .map(|(k, c)| (k + 1, c))
            .filter(|&(x, _)| x >= xmin)
            .collect();
        let n = values.iter().map(|v| v.1).sum();
        Self { xmin, values, n }
    }

    pub fn distinct(&self) -> usize {
        self.values.len()
    }

    pub fn log_likelihood<F: Real>(&self, model: &DistributionModel<F>) -> F {
        let ln_z = model.log_norm(self.xmin);
        self.values
            .iter()
            .map(|&(x, c)| F::from_count(c) * model.log_pmf_with(x, ln_z))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KminSelection {
    Fixed,
    /// The candidate with the smallest KS distance.
    MinKs,
    /// Smallest candidate whose bootstrap p-value reaches the level.
    MinPlausible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit<F> {
    pub model: DistributionModel<F>,
    /// Lower cutoff on the `k + 1` scale.
    pub k_min: u64,
    pub ks_stat: F,
    pub p_value: Option<F>,
    pub log_likelihood: F,
    pub n_tail: u64,
    pub n_total: u64,
    pub selection: KminSelection,
    /// `(k_min, KS)` pairs examined by the selection, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scan: Vec<(u64, F)>,
    pub seed: Option<u64>,
    pub n_bootstrap: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<F: Real> TailFit<F> {
    pub fn family(&self) -> Family {
        self.model.family()
    }

    /// Model cumulative `C(k)` scaled by the tail fraction, on a log-spaced
    /// grid of `k` from the cutoff to `k_max`. Rows are `(k, C(k))`.
    pub fn overlay(&self, k_max: u64, points_per_decade: usize) -> Vec<(u64, F)> {
        let frac = F::from_count(self.n_tail) / F::from_count(self.n_total.max(1));
        let start = self.k_min - 1;
        let mut grid = vec![start];
        let lo = (start.max(1)) as f64;
        let hi = k_max.max(start + 1) as f64;
        let n = (((hi / lo).log10() * points_per_decade as f64).ceil() as usize).max(1);
        for i in 0..=n {
            let k = (lo * (hi / lo).powf(i as f64 / n as f64)).round() as u64;
            if k > *grid.last().unwrap() {
                grid.push(k);
            }
        }
        let ln_z = self.model.log_norm(self.k_min);
        let mut out = Vec::with_capacity(grid.len());
        let mut surv = F::one();
        let mut x = self.k_min;
        for k in grid {
            while x < k + 1 {
                surv = surv - self.model.log_pmf_with(x, ln_z).exp();
                x += 1;
            }
            out.push((k, frac * surv.max(F::zero())));
        }
        out
    }
}

/// Complementary cumulative distribution `C(k) = Σ_{i≥k} P(i)` for every
/// integer `k` from the smallest to the largest observed degree.
pub fn cumulative<F: Real>(hist: &DegreeHistogram) -> Result<Vec<(u64, F)>> {
    let (Some(lo), Some(hi)) = (hist.iter().next().map(|p| p.0), hist.max_degree()) else {
        return Err(Error::Domain("empty histogram".into()));
    };
    let total = F::from_count(hist.total_nodes);
    let mut remaining = hist.total_nodes;
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    for k in lo..=hi {
        out.push((k, F::from_count(remaining) / total));
        remaining -= hist.get(k);
    }
    Ok(out)
}

pub fn write_cumulative_csv<F: Real, W: Write>(rows: &[(u64, F)], mut out: W) -> Result<()> {
    writeln!(out, "k,c_k")?;
    for (k, c) in rows {
        writeln!(out, "{k},{c}")?;
    }
    Ok(())
}

/// Largest absolute difference between the empirical and model CDFs over
/// the integers from `x_min` to the largest observation.
pub fn ks_statistic<F: Real>(data: &TailData, model: &DistributionModel<F>) -> F {
    let Some(&(xmax, _)) = data.values.last() else {
        return F::zero();
    };
    let ln_z = model.log_norm(data.xmin);
    let n = F::from_count(data.n);
    let mut seen = 0u64;
    let mut cdf = F::zero();
    let mut d = F::zero();
    let mut next = data.values.iter().peekable();
    for x in data.xmin..=xmax {
        cdf = cdf + model.log_pmf_with(x, ln_z).exp();
        if let Some(&&(v, c)) = next.peek() {
            if v == x {
                seen += c;
                next.next();
            }
        }
        let emp = F::from_count(seen) / n;
        d = d.max((emp - cdf.min(F::one())).abs());
    }
    d
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Minimum number of observations with `k + 1 ≥ k_min`.
    pub min_tail: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_tail: DEFAULT_MIN_TAIL }
    }
}

fn check_tail(data: &TailData, options: &FitOptions) -> Result<()> {
    if data.n < options.min_tail {
        return Err(Error::Fit(format!(
            "only {} observations with k+1 ≥ {} (need {})",
            data.n, data.xmin, options.min_tail
        )));
    }
    if data.distinct() < 2 {
        return Err(Error::Fit(format!(
            "degenerate data: a single distinct value above k_min = {}",
            data.xmin
        )));
    }
    Ok(())
}

fn mle_exponential<F: Real>(data: &TailData) -> Result<DistributionModel<F>> {
    // Geometric on x ≥ x_min: q = ȳ/(1 + ȳ) with y = x − x_min, λ = −ln q.
    let n = F::from_count(data.n);
    let ybar = data
        .values
        .iter()
        .map(|&(x, c)| F::from_count(x - data.xmin) * F::from_count(c))
        .sum::<F>()
        / n;
    let q = ybar / (F::one() + ybar);
    let lambda = -q.ln();
    if !(lambda > F::zero() && lambda.is_finite()) {
        return Err(Error::Numeric(format!("exponential MLE gave λ = {lambda}")));
    }
    Ok(DistributionModel::Exponential { lambda })
}

fn mle_power_law<F: Real>(data: &TailData) -> Result<DistributionModel<F>> {
    let nll = |gamma: F| -data.log_likelihood(&DistributionModel::PowerLaw { gamma });
    let m = brent(nll, F::lit(1.0 + 1e-6), F::lit(20.0), F::lit(1e-10), 300);
    if !m.converged || !m.value.is_finite() {
        return Err(Error::Numeric(format!(
            "power-law MLE did not converge (γ = {}, evaluations = {})",
            m.x, m.evaluations
        )));
    }
    Ok(DistributionModel::PowerLaw { gamma: m.x })
}

const SIGMA_RANGE: (f64, f64) = (1e-3, 1e3);
const MU_RANGE: (f64, f64) = (-1e3, 1e3);

fn mle_log_normal<F: Real>(data: &TailData) -> Result<DistributionModel<F>> {
    let n = F::from_count(data.n);
    let mean = data
        .values
        .iter()
        .map(|&(x, c)| F::from_count(c) * F::from_count(x).ln())
        .sum::<F>()
        / n;
    let var = data
        .values
        .iter()
        .map(|&(x, c)| F::from_count(c) * (F::from_count(x).ln() - mean).powi(2))
        .sum::<F>()
        / n;
    let sd = var.sqrt().max(F::lit(0.05));

    // Parameterised as (μ, ln σ); σ and μ are boxed by an infinite penalty.
    let nll = |p: &[F]| -> F {
        let sigma = p[1].exp();
        if !(p[0] > F::lit(MU_RANGE.0) && p[0] < F::lit(MU_RANGE.1))
            || !(sigma > F::lit(SIGMA_RANGE.0) && sigma < F::lit(SIGMA_RANGE.1))
        {
            return F::infinity();
        }
        -data.log_likelihood(&DistributionModel::LogNormal { mu: p[0], sigma })
    };
    let starts = [
        [mean, sd.ln()],
        [mean - sd * sd, (sd * F::lit(1.5)).ln()],
        [mean - F::lit(3.0) * sd, (sd * F::lit(2.0)).ln()],
        [F::lit(0.0), F::lit(0.0)],
    ];
    let ftol = F::lit(1e-15);
    let mut best: Option<crate::optim::Minimum<F, Vec<F>>> = None;
    for s in &starts {
        let m = nelder_mead(nll, s, &[F::lit(0.5), F::lit(0.3)], ftol, 4000);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let first = best.unwrap();
    // Restart from the best vertex to shake off premature collapse.
    let m = nelder_mead(nll, &first.x, &[F::lit(0.05), F::lit(0.05)], ftol, 4000);
    let m = if m.value <= first.value { m } else { first };
    if !m.value.is_finite() {
        return Err(Error::Numeric("log-normal likelihood is not finite at any start".into()));
    }
    let sigma = m.x[1].exp();
    let at_bound = sigma <= F::lit(SIGMA_RANGE.0 * 1.01) || sigma >= F::lit(SIGMA_RANGE.1 * 0.99);
    if at_bound || !m.converged {
        return Err(Error::Numeric(format!(
            "log-normal MLE did not converge (μ = {}, σ = {sigma}, evaluations = {}, converged = {})",
            m.x[0], m.evaluations, m.converged
        )));
    }
    Ok(DistributionModel::LogNormal { mu: m.x[0], sigma })
}

fn fit_data<F: Real>(data: &TailData, family: Family, options: &FitOptions) -> Result<(DistributionModel<F>, F, F)> {
    check_tail(data, options)?;
    let model = match family {
        Family::LogNormal => mle_log_normal(data)?,
        Family::PowerLaw => mle_power_law(data)?,
        Family::Exponential => mle_exponential(data)?,
    };
    let ll = data.log_likelihood(&model);
    let ks = ks_statistic(data, &model);
    Ok((model, ll, ks))
}

/// Maximum-likelihood fit of `family` on `k + 1 ≥ k_min`.
pub fn fit_mle<F: Real>(hist: &DegreeHistogram, family: Family, k_min: u64) -> Result<TailFit<F>> {
    fit_mle_with(hist, family, k_min, &FitOptions::default())
}

pub fn fit_mle_with<F: Real>(
    hist: &DegreeHistogram,
    family: Family,
    k_min: u64,
    options: &FitOptions,
) -> Result<TailFit<F>> {
    if k_min == 0 {
        return Err(Error::Config("k_min is on the k+1 scale and must be ≥ 1".into()));
    }
    let data = TailData::from_histogram(hist, k_min);
    let (model, log_likelihood, ks_stat) = fit_data(&data, family, options)?;
    Ok(TailFit {
        model,
        k_min,
        ks_stat,
        p_value: None,
        log_likelihood,
        n_tail: data.n,
        n_total: hist.total_nodes,
        selection: KminSelection::Fixed,
        scan: Vec::new(),
        seed: None,
        n_bootstrap: None,
        warnings: Vec::new(),
    })
}

/// Candidate cutoffs: every observed `k + 1` that leaves at least
/// `min_tail` observations and two distinct values above it.
fn candidates(hist: &DegreeHistogram, options: &FitOptions) -> Vec<u64> {
    let values: Vec<(u64, u64)> = hist.iter().map(|(k, c)| (k + 1, c)).collect();
    let mut above = hist.total_nodes;
    let mut out = Vec::new();
    for (i, &(x, c)) in values.iter().enumerate() {
        if above >= options.min_tail && values.len() - i >= 2 {
            out.push(x);
        }
        above -= c;
    }
    out
}

/// Chooses `k_min` by the minimum-KS criterion and returns that fit.
pub fn select_kmin<F: Real>(hist: &DegreeHistogram, family: Family) -> Result<TailFit<F>> {
    select_kmin_with(hist, family, &FitOptions::default())
}

pub fn select_kmin_with<F: Real>(hist: &DegreeHistogram, family: Family, options: &FitOptions) -> Result<TailFit<F>> {
    let cands = candidates(hist, options);
    let fits: Vec<Option<TailFit<F>>> = cands
        .par_iter()
        .map(|&k| fit_mle_with(hist, family, k, options).ok())
        .collect();
    let scan: Vec<(u64, F)> = fits.iter().flatten().map(|f| (f.k_min, f.ks_stat)).collect();
    let mut best = fits
        .into_iter()
        .flatten()
        .min_by(|a, b| a.ks_stat.partial_cmp(&b.ks_stat).unwrap().then(a.k_min.cmp(&b.k_min)))
        .ok_or_else(|| Error::Fit("no k_min candidate leaves enough tail observations".into()))?;
    best.selection = KminSelection::MinKs;
    best.scan = scan;
    Ok(best)
}

/// Smallest `k_min` whose bootstrap p-value is at least `level`.
pub fn select_kmin_plausible<F: Real>(
    hist: &DegreeHistogram,
    family: Family,
    level: F,
    n_bootstrap: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<TailFit<F>> {
    let mut scan = Vec::new();
    for k in candidates(hist, options) {
        let Ok(fit) = fit_mle_with::<F>(hist, family, k, options) else {
            continue;
        };
        let tested = gof_test_with(hist, &fit, n_bootstrap, seed, options)?;
        scan.push((k, tested.ks_stat));
        if tested.p_value.is_some_and(|p| p >= level) {
            return Ok(TailFit {
                selection: KminSelection::MinPlausible,
                scan,
                ..tested
            });
        }
    }
    Err(Error::Fit(format!("no k_min gives a plausible fit at level {level}")))
}

/// Semi-parametric bootstrap p-value for a fit. Each replicate draws `n`
/// points: with probability `n_tail/n` from the fitted model, otherwise
/// uniformly from the observed values below `k_min`. The replicate is refit
/// the same way the original was (fixed `k_min`, or a fresh minimum-KS
/// scan), and the p-value is the fraction of replicates whose KS distance
/// exceeds the observed one. Replicate `r` uses random stream `r` of `seed`.
pub fn gof_test<F: Real>(hist: &DegreeHistogram, fit: &TailFit<F>, n_bootstrap: usize, seed: u64) -> Result<TailFit<F>> {
    gof_test_with(hist, fit, n_bootstrap, seed, &FitOptions::default())
}

pub fn gof_test_with<F: Real>(
    hist: &DegreeHistogram,
    fit: &TailFit<F>,
    n_bootstrap: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<TailFit<F>> {
    if n_bootstrap == 0 {
        return Err(Error::Config("at least one bootstrap replicate is required".into()));
    }
    let body: Vec<u64> = hist
        .iter()
        .filter(|&(k, _)| k + 1 < fit.k_min)
        .flat_map(|(k, c)| std::iter::repeat_n(k, c as usize))
        .collect();
    let n = hist.total_nodes;
    let p_tail = fit.n_tail as f64 / n as f64;
    let sampler = ModelSampler::new(fit.model, fit.k_min);
    let family = fit.family();
    let rescan = fit.selection == KminSelection::MinKs;

    let outcomes: Vec<Option<bool>> = (0..n_bootstrap as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r);
            let mut synth = DegreeHistogram::default();
            for _ in 0..n {
                if body.is_empty() || rand::Rng::random::<f64>(&mut rng) < p_tail {
                    synth.add(sampler.sample(&mut rng) - 1, 1);
                } else {
                    synth.add(body[rng::index(&mut rng, body.len())], 1);
                }
            }
            let refit = if rescan {
                select_kmin_with::<F>(&synth, family, options)
            } else {
                fit_mle_with::<F>(&synth, family, fit.k_min, options)
            };
            refit.ok().map(|f| f.ks_stat > fit.ks_stat)
        })
        .collect();

    let valid = outcomes.iter().flatten().count();
    let exceed = outcomes.iter().flatten().filter(|&&b| b).count();
    let mut out = fit.clone();
    if valid == 0 {
        return Err(Error::Fit("every bootstrap replicate failed to fit".into()));
    }
    if valid < n_bootstrap {
        out.warnings.push(format!(
            "{} of {n_bootstrap} bootstrap replicates failed to fit and were dropped",
            n_bootstrap - valid
        ));
    }
    if n_bootstrap < 100 {
        out.warnings.push(format!(
            "only {n_bootstrap} bootstrap replicates; p-value resolution is coarse"
        ));
    }
    out.p_value = Some(F::from_count(exceed as u64) / F::from_count(valid as u64));
    out.seed = Some(seed);
    out.n_bootstrap = Some(n_bootstrap);
    Ok(out)
}

/// Vuong-style comparison of two fits on the same support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRatio<F> {
    pub first: Family,
    pub second: Family,
    /// `Σ_i ln p_first(x_i) − ln p_second(x_i)`.
    pub ratio: F,
    /// Ratio over its standard deviation, `R / (σ √n)`.
    pub normalized: F,
    /// Two-sided p-value of the sign of the ratio.
    pub p_value: F,
    /// `None` when the fits are tied.
    pub preferred: Option<Family>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRanking<F> {
    pub k_min: u64,
    /// Families by decreasing log-likelihood.
    pub order: Vec<(Family, F)>,
    pub pairwise: Vec<LikelihoodRatio<F>>,
    pub tie: bool,
}

impl<F: Real> FamilyRanking<F> {
    pub fn winner(&self) -> Option<Family> {
        (!self.tie || self.order.len() > 2).then(|| self.order[0].0)
    }

    pub fn rank_of(&self, family: Family) -> Option<usize> {
        self.order.iter().position(|(f, _)| *f == family)
    }
}

pub fn compare_families<F: Real>(hist: &DegreeHistogram, fits: &[TailFit<F>]) -> Result<FamilyRanking<F>> {
    if fits.len() < 2 {
        return Err(Error::Config("need at least two fits to compare".into()));
    }
    let k_min = fits[0].k_min;
    if fits.iter().any(|f| f.k_min != k_min) {
        return Err(Error::Fit("fits must share a common k_min".into()));
    }
    let data = TailData::from_histogram(hist, k_min);
    let norms: Vec<F> = fits.iter().map(|f| f.model.log_norm(k_min)).collect();
    let lls: Vec<F> = fits.iter().map(|f| data.log_likelihood(&f.model)).collect();
    let mut order: Vec<(Family, F)> = fits.iter().map(|f| f.family()).zip(lls.iter().copied()).collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

    let n = F::from_count(data.n);
    let mut pairwise = Vec::new();
    let mut tie = false;
    for i in 0..fits.len() {
        for j in i + 1..fits.len() {
            let diff = |x: u64| {
                fits[i].model.log_pmf_with(x, norms[i]) - fits[j].model.log_pmf_with(x, norms[j])
            };
            let ratio: F = data.values.iter().map(|&(x, c)| F::from_count(c) * diff(x)).sum();
            let mean = ratio / n;
            let var = data
                .values
                .iter()
                .map(|&(x, c)| F::from_count(c) * (diff(x) - mean).powi(2))
                .sum::<F>()
                / n;
            let sd = var.sqrt();
            let (normalized, p_value) = if sd > F::zero() {
                let z = ratio / (sd * n.sqrt());
                let p = statrs::function::erf::erfc(z.abs().as_f64() / std::f64::consts::SQRT_2);
                (z, F::lit(p))
            } else {
                (F::zero(), F::one())
            };
            let preferred = if ratio > F::zero() {
                Some(fits[i].family())
            } else if ratio < F::zero() {
                Some(fits[j].family())
            } else {
                tie = true;
                None
            };
            pairwise.push(LikelihoodRatio {
                first: fits[i].family(),
                second: fits[j].family(),
                ratio,
                normalized,
                p_value,
                preferred,
            });
        }
    }
    Ok(FamilyRanking { k_min, order, pairwise, tie })
}

/// Descriptive cumulative form `L(k) = β0·exp(−β1·ln k − β2·ln² k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFormCurve<F> {
    pub beta0: F,
    pub beta1: F,
    pub beta2: F,
}

pub fn eval_lcurve<F: Real>(params: &LogNormalFormCurve<F>, k: F) -> Result<F> {
    if !(k >= F::one()) {
        return Err(Error::Domain(format!("log-normal form needs k ≥ 1, got {k}")));
    }
    let l = k.ln();
    Ok(params.beta0 * (-params.beta1 * l - params.beta2 * l * l).exp())
}
