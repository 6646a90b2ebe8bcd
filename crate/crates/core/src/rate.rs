//! Attachment-rate estimators.
//!
//! * [`jeong_rate`]: `Â(k) = (n_1/m_2)·(m_2(k)/n_1(k))` on a two-step sequence.
//! * [`newman_rate`]: the multi-step generalisation with Iverson-gated
//!   weights `w_t(k) = m_t·[n_{t−1}(k) ≠ 0]` and `W(k) = Σ_{t>1} w_t(k)`.
//!
//! The Newman estimator normalises each step by `N_{t−1}/m_t`, the node count
//! of `G_{t−1}` over the edges added at `t`, before averaging:
//!
//! ```text
//! Â(k) = (1/W(k)) Σ_{t>1} w_t(k) · (N_{t−1}/m_t) · m_t(k)/n_{t−1}(k)
//! ```
//!
//! With a single measured step this is exactly Jeong's estimator. The
//! literal single-constant form `Z/W(k)·Σ w_t(k)·m_t(k)/n_{t−1}(k)` with
//! `Z = Σ_{t>1} N_{t−1}/m_t` is available as [`Normalization::Global`].

use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::affit::{fit_af, AfFamily};
use crate::ingest::DateWindow;
use crate::timeline::GrowthSequence;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Jeong,
    NewmanCorrected,
    NewmanUncorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewmanVariant {
    /// Averages over the steps where degree-`k` nodes exist (`W(k)`).
    Corrected,
    /// Averages over all steps (`Σ_t m_t`); biased low at large `k`.
    Uncorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `N_{t−1}/m_t` inside the sum.
    #[default]
    PerStep,
    /// One constant `Z = Σ_{t>1} N_{t−1}/m_t` outside the sum.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint<F> {
    pub k: u64,
    pub a_hat: F,
    /// Edge observations during which degree class `k` was non-empty,
    /// i.e. the gated weight `W(k)`. Binning weights points by it, which
    /// pools a window into one ratio of sums.
    pub support: u64,
    /// Edges observed landing on degree-`k` targets.
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentRateEstimate<F> {
    /// Sorted by `k`; only degrees with at least one observed edge.
    pub points: Vec<RatePoint<F>>,
    pub estimator: Estimator,
    pub normalization: Normalization,
    /// `Z = Σ_{t>1, m_t>0} N_{t−1}/m_t`.
    pub z: F,
    /// Total edges measured, `Σ_{t>1} m_t`.
    pub edges_measured: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<F: Real> AttachmentRateEstimate<F> {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, k: u64) -> Option<F> {
        self.points
            .binary_search_by_key(&k, |p| p.k)
            .ok()
            .map(|i| self.points[i].a_hat)
    }

    /// `k,a_hat,support,events`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,a_hat,support,events")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.k, p.a_hat, p.support, p.events)?;
        }
        Ok(())
    }
}

/// Per-degree accumulators of the Newman estimator.
#[derive(Debug, Clone)]
pub struct NewmanAccumulator<F> {
    /// `Σ_t N_{t−1}·m_t(k)/n_{t−1}(k)`.
    pub per_step_sum: Vec<F>,
    /// `Σ_t m_t·m_t(k)/n_{t−1}(k)`.
    pub global_sum: Vec<F>,
    /// `W(k)`.
    pub weight: Vec<u64>,
    /// Edges observed landing on degree-`k` targets.
    pub landed: Vec<u64>,
    pub z: F,
    pub edges_measured: u64,
}

struct DegreeState {
    degree: Vec<u32>,
    hist: Vec<u64>,
    /// Cumulative measured edges at the moment class `k` last became non-empty.
    opened_at: Vec<u64>,
    measured: u64,
}

impl DegreeState {
    fn new() -> Self {
        Self {
            degree: Vec::new(),
            hist: Vec::new(),
            opened_at: Vec::new(),
            measured: 0,
        }
    }

    fn grow(&mut self, k: usize) {
        if self.hist.len() <= k {
            self.hist.resize(k + 1, 0);
            self.opened_at.resize(k + 1, 0);
        }
    }

    fn enter(&mut self, k: usize) {
        self.grow(k);
        if self.hist[k] == 0 {
            self.opened_at[k] = self.measured;
        }
        self.hist[k] += 1;
    }

    fn leave(&mut self, k: usize, weight: &mut Vec<u64>) {
        self.hist[k] -= 1;
        if self.hist[k] == 0 {
            if weight.len() <= k {
                weight.resize(k + 1, 0);
            }
            weight[k] += self.measured - self.opened_at[k];
        }
    }

    fn add_node(&mut self) {
        self.degree.push(0);
        self.enter(0);
    }

    fn add_edge(&mut self, target: u32, weight: &mut Vec<u64>) {
        let k = self.degree[target as usize] as usize;
        self.leave(k, weight);
        self.enter(k + 1);
        self.degree[target as usize] += 1;
    }

    fn close(&mut self, weight: &mut Vec<u64>) {
        if weight.len() < self.hist.len() {
            weight.resize(self.hist.len(), 0);
        }
        for (k, &n) in self.hist.iter().enumerate() {
            if n > 0 {
                weight[k] += self.measured - self.opened_at[k];
            }
        }
    }
}

/// Folds a sequence into Newman accumulators, measuring only steps in
/// `measured` (1-based, all steps when `None`). Degree state always
/// accumulates over the full history.
pub fn accumulate<F: Real>(seq: &GrowthSequence, measured: Option<Range<usize>>) -> NewmanAccumulator<F> {
    let mut acc = NewmanAccumulator {
        per_step_sum: Vec::new(),
        global_sum: Vec::new(),
        weight: Vec::new(),
        landed: Vec::new(),
        z: F::zero(),
        edges_measured: 0,
    };
    let mut state = DegreeState::new();
    // Weight is only credited while measuring; `opened_at` uses the measured
    // edge count, so unmeasured steps contribute nothing to `W(k)`.
    let mut target_degrees: Vec<u32> = Vec::new();
    for step in seq.iter_steps() {
        let t = step.t;
        let m_t = step.m() as u64;
        let measure = t > 1 && m_t > 0 && measured.as_ref().is_none_or(|r| r.contains(&t));
        if measure {
            let n_prev = F::from_count(state.degree.len() as u64);
            let m_f = F::from_count(m_t);
            target_degrees.clear();
            target_degrees.extend(step.cross_edges.iter().map(|&(_, dst)| state.degree[dst as usize]));
            target_degrees.sort_unstable();
            let need = *target_degrees.last().unwrap() as usize + 1;
            if acc.per_step_sum.len() < need {
                acc.per_step_sum.resize(need, F::zero());
                acc.global_sum.resize(need, F::zero());
                acc.landed.resize(need, 0);
            }
            for group in target_degrees.chunk_by(|a, b| a == b) {
                let k = group[0] as usize;
                let count = F::from_count(group.len() as u64);
                let n_k = F::from_count(state.hist[k]);
                acc.per_step_sum[k] = acc.per_step_sum[k] + n_prev * count / n_k;
                acc.global_sum[k] = acc.global_sum[k] + m_f * count / n_k;
                acc.landed[k] += group.len() as u64;
            }
            acc.z = acc.z + n_prev / m_f;
            acc.edges_measured += m_t;
            state.measured += m_t;
        }
        for _ in step.new_nodes.clone() {
            state.add_node();
        }
        for &(_, dst) in step.cross_edges.iter().chain(step.intra_edges) {
            state.add_edge(dst, &mut acc.weight);
        }
    }
    state.close(&mut acc.weight);
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewmanOptions<F> {
    pub variant: NewmanVariant,
    pub normalization: Normalization,
    /// Multiplies every estimate; used to check shape invariance.
    pub scale: F,
}

impl<F: Real> Default for NewmanOptions<F> {
    fn default() -> Self {
        Self {
            variant: NewmanVariant::Corrected,
            normalization: Normalization::PerStep,
            scale: F::one(),
        }
    }
}

impl<F: Real> NewmanAccumulator<F> {
    pub fn estimate(&self, options: &NewmanOptions<F>) -> AttachmentRateEstimate<F> {
        let mut points = Vec::new();
        let total = F::from_count(self.edges_measured);
        for (k, &landed) in self.landed.iter().enumerate() {
            if landed == 0 {
                continue;
            }
            let support = self.weight[k];
            let denom = match options.variant {
                NewmanVariant::Corrected => F::from_count(self.weight[k]),
                NewmanVariant::Uncorrected => total,
            };
            let a = match options.normalization {
                Normalization::PerStep => self.per_step_sum[k] / denom,
                Normalization::Global => self.z * self.global_sum[k] / denom,
            };
            points.push(RatePoint {
                k: k as u64,
                a_hat: options.scale * a,
                support,
                events: landed,
            });
        }
        let mut warnings = Vec::new();
        if points.is_empty() {
            warnings.push("no edges were measured; estimate is empty".to_string());
        }
        AttachmentRateEstimate {
            points,
            estimator: match options.variant {
                NewmanVariant::Corrected => Estimator::NewmanCorrected,
                NewmanVariant::Uncorrected => Estimator::NewmanUncorrected,
            },
            normalization: options.normalization,
            z: self.z,
            edges_measured: self.edges_measured,
            warnings,
        }
    }
}

/// Jeong's bi-epochal estimator. Requires exactly two steps.
pub fn jeong_rate<F: Real>(seq: &GrowthSequence) -> Result<AttachmentRateEstimate<F>> {
    if seq.steps() != 2 {
        return Err(Error::Shape(format!(
            "Jeong's estimator needs exactly two steps, found {}",
            seq.steps()
        )));
    }
    let degrees = seq.in_degrees_at(1)?;
    let n1 = degrees.len() as u64;
    let mut hist: Vec<u64> = Vec::new();
    for &k in &degrees {
        if hist.len() <= k as usize {
            hist.resize(k as usize + 1, 0);
        }
        hist[k as usize] += 1;
    }
    let step = seq.step(2);
    let m2 = step.m() as u64;
    let mut landed = vec![0u64; hist.len()];
    for &(_, dst) in step.cross_edges {
        landed[degrees[dst as usize] as usize] += 1;
    }
    let mut warnings = Vec::new();
    if m2 == 0 {
        warnings.push("no cross edges at step 2; estimate is empty".to_string());
    }
    let points = landed
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| RatePoint {
            k: k as u64,
            // Same operation order as the Newman per-step sum so the two agree bit for bit.
            a_hat: F::from_count(n1) * F::from_count(c) / F::from_count(hist[k]) / F::from_count(m2),
            support: m2,
            events: c,
        })
        .collect();
    Ok(AttachmentRateEstimate {
        points,
        estimator: Estimator::Jeong,
        normalization: Normalization::PerStep,
        z: if m2 > 0 { F::from_count(n1) / F::from_count(m2) } else { F::zero() },
        edges_measured: m2,
        warnings,
    })
}

/// Corrected or uncorrected Newman estimate with per-step normalisation.
pub fn newman_rate<F: Real>(seq: &GrowthSequence, variant: NewmanVariant) -> Result<AttachmentRateEstimate<F>> {
    newman_rate_with(
        seq,
        &NewmanOptions {
            variant,
            ..NewmanOptions::default()
        },
    )
}

pub fn newman_rate_with<F: Real>(
    seq: &GrowthSequence,
    options: &NewmanOptions<F>,
) -> Result<AttachmentRateEstimate<F>> {
    if seq.steps() < 2 {
        return Err(Error::Shape("Newman's estimator needs at least two steps".into()));
    }
    Ok(accumulate(seq, None).estimate(options))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinnedPoint<F> {
    pub k: u64,
    pub a_hat: F,
    pub support: u64,
    /// Attachment events pooled into the bin.
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedRate<F> {
    pub points: Vec<BinnedPoint<F>>,
    pub half_width: F,
}

pub const DEFAULT_HALF_WIDTH: f64 = 0.025;

impl<F: Real> BinnedRate<F> {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, F)>) -> Self {
        Self {
            points: pairs
                .into_iter()
                .map(|(k, a_hat)| BinnedPoint { k, a_hat, support: 1, events: 1 })
                .collect(),
            half_width: F::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `k,a_hat_binned,support,events`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,a_hat_binned,support,events")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.k, p.a_hat, p.support, p.events)?;
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let mut points = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| {
                Error::parse(e.position().map(|p| p.line()).unwrap_or(0), e.to_string())
            })?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let field = |i: usize| row.get(i).ok_or_else(|| Error::parse(line, "missing field"));
            let k = field(0)?.trim().parse::<u64>().map_err(|e| Error::parse(line, e.to_string()))?;
            let a = field(1)?.trim().parse::<f64>().map_err(|e| Error::parse(line, e.to_string()))?;
            let support = match row.get(2) {
                Some(s) => s.trim().parse::<u64>().map_err(|e| Error::parse(line, e.to_string()))?,
                None => 1,
            };
            let events = match row.get(3) {
                Some(s) => s.trim().parse::<u64>().map_err(|e| Error::parse(line, e.to_string()))?,
                None => 1,
            };
            points.push(BinnedPoint { k, a_hat: F::lit(a), support, events });
        }
        points.sort_by_key(|p| p.k);
        Ok(Self { points, half_width: F::zero() })
    }
}

/// Support-weighted averages of `Â` over closed windows `[k(1−h), k(1+h)]`
/// centred on every observed `k`.
pub fn bin_rate<F: Real>(est: &AttachmentRateEstimate<F>, half_width: F) -> Result<BinnedRate<F>> {
    if est.points.is_empty() {
        return Err(Error::Fit("cannot bin an empty estimate".into()));
    }
    if !(half_width >= F::zero()) {
        return Err(Error::Config("bin half-width must be non-negative".into()));
    }
    let pts = &est.points;
    let ks: Vec<F> = pts.iter().map(|p| F::from_count(p.k)).collect();
    let mut lo = 0;
    let mut hi = 0;
    let mut out = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let left = ks[i] * (F::one() - half_width);
        let right = ks[i] * (F::one() + half_width);
        while ks[lo] < left {
            lo += 1;
        }
        while hi + 1 < pts.len() && ks[hi + 1] <= right {
            hi += 1;
        }
        let window = &pts[lo..=hi];
        let support: u64 = window.iter().map(|q| q.support).sum();
        let weighted: F = window
            .iter()
            .map(|q| q.a_hat * F::from_count(q.support))
            .sum();
        out.push(BinnedPoint {
            k: p.k,
            a_hat: weighted / F::from_count(support),
            support,
            events: window.iter().map(|q| q.events).sum(),
        });
    }
    Ok(BinnedRate { points: out, half_width })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepWindow {
    /// 1-based step indices, end exclusive.
    Steps { start: usize, end: usize },
    Dates(DateWindow),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowAlpha<F> {
    pub window: StepWindow,
    pub steps: (usize, usize),
    pub alpha: F,
    pub n_bins: usize,
}

/// Log-linear exponent fitted separately inside each window. Steps outside
/// a window still shape the degree histograms; they are just not measured.
pub fn windowed_alpha<F: Real>(seq: &GrowthSequence, windows: &[StepWindow]) -> Result<Vec<WindowAlpha<F>>> {
    let mut ranges = Vec::with_capacity(windows.len());
    for w in windows {
        let r = match w {
            StepWindow::Steps { start, end } => {
                let s = (*start).max(1);
                let e = (*end).min(seq.steps() + 1);
                (s < e).then_some(s..e)
            }
            StepWindow::Dates(d) => seq.steps_in_window(d),
        };
        ranges.push(r);
    }
    let mut last_end = 0;
    for r in ranges.iter().flatten() {
        if r.start < last_end {
            return Err(Error::Config("windows must be chronological and non-overlapping".into()));
        }
        last_end = r.end;
    }

    let mut out = Vec::new();
    for (w, r) in windows.iter().zip(ranges) {
        let Some(r) = r else {
            log::warn!("window {w:?} contains no steps; skipped");
            continue;
        };
        let est = accumulate::<F>(seq, Some(r.clone())).estimate(&NewmanOptions::default());
        if est.is_empty() {
            log::warn!("window {w:?} has no measured edges; skipped");
            continue;
        }
        let binned = bin_rate(&est, F::lit(DEFAULT_HALF_WIDTH))?;
        let fit = fit_af(&binned, AfFamily::LogLinear)?;
        out.push(WindowAlpha {
            window: w.clone(),
            steps: (r.start, r.end),
            alpha: fit.shape,
            n_bins: binned.len(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::{Resolution, SequenceBuilder};

    /// G_1 in-degrees {0, 0, 1}; step 2 adds two nodes with one edge to the
    /// degree-1 node and one to a degree-0 node.
    fn small_bi_epochal() -> GrowthSequence {
        let mut b = SequenceBuilder::new(Resolution::Synthetic);
        b.push_step(3, &[], &[(0, 2)]).unwrap();
        b.push_step(2, &[(3, 2), (4, 0)], &[]).unwrap();
        b.finish().unwrap()
    }

    #[test]
    fn jeong_small_example() {
        let est = jeong_rate::<f64>(&small_bi_epochal()).unwrap();
        assert_eq!(est.get(0), Some(0.75));
        assert_eq!(est.get(1), Some(1.5));
        assert_eq!(est.points.len(), 2);
    }

    #[test]
    fn jeong_omits_unobserved_degrees() {
        let mut b = SequenceBuilder::new(Resolution::Synthetic);
        b.push_step(3, &[], &[(0, 2)]).unwrap();
        b.push_step(1, &[(3, 2)], &[]).unwrap();
        let est = jeong_rate::<f64>(&b.finish().unwrap()).unwrap();
        assert_eq!(est.get(0), None);
        assert_eq!(est.points.len(), 1);
    }

    #[test]
    fn jeong_shape_and_empty_cases() {
        let mut b = SequenceBuilder::new(Resolution::Synthetic);
        b.push_step(2, &[], &[]).unwrap();
        b.push_step(1, &[], &[]).unwrap();
        let seq = b.finish().unwrap();
        let est = jeong_rate::<f64>(&seq).unwrap();
        assert!(est.is_empty() && !est.warnings.is_empty());

        let mut b = SequenceBuilder::new(Resolution::Synthetic);
        b.push_step(2, &[], &[]).unwrap();
        assert!(matches!(jeong_rate::<f64>(&b.finish().unwrap()), Err(Error::Shape(_))));
    }

    #[test]
    fn newman_reduces_to_jeong() {
        let seq = small_bi_epochal();
        let j = jeong_rate::<f64>(&seq).unwrap();
        let n = newman_rate::<f64>(&seq, NewmanVariant::Corrected).unwrap();
        assert_eq!(j.points, n.points);
    }

    #[test]
    fn newman_weights_skip_empty_classes() {
        // 0 <- 1 at t=2, then node 2 cites 0 (deg 1) at t=3.
        let mut b = SequenceBuilder::new(Resolution::Synthetic);
        b.push_step(1, &[], &[]).unwrap();
        b.push_step(1, &[(1, 0)], &[]).unwrap();
        b.push_step(1, &[(2, 0)], &[]).unwrap();
        let seq = b.finish().unwrap();
        let acc = accumulate::<f64>(&seq, None);
        // Class 0 non-empty at t=2 and t=3; class 1 only at t=3.
        assert_eq!(&acc.weight[..2], &[2, 1]);
        assert_eq!(acc.landed[..2], [1, 1]);
        let est = acc.estimate(&NewmanOptions::default());
        // k=0: N_1·1/1 / 2 = 0.5; k=1: N_2·1/1 / 1 = 2.
        assert_eq!(est.get(0), Some(0.5));
        assert_eq!(est.get(1), Some(2.0));
        let un = acc.estimate(&NewmanOptions { variant: NewmanVariant::Uncorrected, ..Default::default() });
        assert_eq!(un.get(1), Some(1.0));
        assert_eq!(acc.z, 1.0 + 2.0);
    }

    #[test]
    fn bin_examples() {
        let est = |pts: &[(u64, f64, u64)]| AttachmentRateEstimate {
            points: pts.iter().map(|&(k, a_hat, support)| RatePoint { k, a_hat, support, events: support }).collect(),
            estimator: Estimator::NewmanCorrected,
            normalization: Normalization::PerStep,
            z: 1.0,
            edges_measured: 0,
            warnings: vec![],
        };
        let b = bin_rate(&est(&[(10, 2.0, 3)]), 0.025).unwrap();
        assert_eq!((b.points[0].k, b.points[0].a_hat), (10, 2.0));
        let b = bin_rate(&est(&[(100, 1.0, 1), (102, 3.0, 1)]), 0.025).unwrap();
        assert_eq!(b.points[0].a_hat, 2.0);
        assert_eq!(b.points[0].support, 2);
        let b = bin_rate(&est(&[(100, 1.0, 3), (102, 3.0, 1)]), 0.025).unwrap();
        assert_eq!(b.points[0].a_hat, 1.5);
        assert!(bin_rate(&est(&[]), 0.025).is_err());
    }

    #[test]
    fn overlapping_windows_are_rejected() {
        let seq = small_bi_epochal();
        let w = [StepWindow::Steps { start: 1, end: 3 }, StepWindow::Steps { start: 2, end: 3 }];
        assert!(matches!(windowed_alpha::<f64>(&seq, &w), Err(Error::Config(_))));
    }
}
