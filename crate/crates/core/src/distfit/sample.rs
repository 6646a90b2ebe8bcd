//! Exact-table sampling from a discretised model.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::model::{ln_normal_sf, DistributionModel};
use crate::Real;

const TABLE_CAP: u64 = 4_000_000;
const TAIL_EPS: f64 = 1e-12;

/// Inverse-CDF sampler over `x ≥ x_min`. Masses are tabulated until the
/// remaining tail is below `1e-12` (or the table reaches four million
/// entries); draws beyond the table come from the continuous density
/// restricted to `[K − ½, ∞)` and rounded.
#[derive(Debug, Clone)]
pub struct ModelSampler<F> {
    model: DistributionModel<F>,
    xmin: u64,
    cumulative: Vec<f64>,
}

impl<F: Real> ModelSampler<F> {
    pub fn new(model: DistributionModel<F>, xmin: u64) -> Self {
        let log_norm = model.log_norm(xmin);
        let mut cumulative = Vec::new();
        let mut acc = 0.0f64;
        let mut x = xmin;
        loop {
            acc += model.log_pmf_with(x, log_norm).as_f64().exp();
            cumulative.push(acc.min(1.0));
            x += 1;
            if 1.0 - acc < TAIL_EPS || x - xmin >= TABLE_CAP {
                break;
            }
        }
        Self { model, xmin, cumulative }
    }

    pub fn table_end(&self) -> u64 {
        self.xmin + self.cumulative.len() as u64
    }

    /// Draws `x = k + 1`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let last = *self.cumulative.last().unwrap();
        if u < last {
            let i = self.cumulative.partition_point(|&c| c <= u);
            return self.xmin + i as u64;
        }
        self.sample_tail(rng)
    }

    fn sample_tail<R: Rng>(&self, rng: &mut R) -> u64 {
        let k = self.table_end();
        let lo = k as f64 - 0.5;
        let v: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let x = match self.model {
            DistributionModel::PowerLaw { gamma } => lo * v.powf(-1.0 / (gamma.as_f64() - 1.0)),
            DistributionModel::Exponential { lambda } => lo - v.ln() / lambda.as_f64(),
            DistributionModel::LogNormal { mu, sigma } => {
                let (mu, sigma) = (mu.as_f64(), sigma.as_f64());
                let z0 = (lo.ln() - mu) / sigma;
                let q = v * ln_normal_sf(z0).exp();
                let std = Normal::standard();
                let z = -std.inverse_cdf(q.max(f64::MIN_POSITIVE));
                (mu + sigma * z.max(z0)).exp()
            }
        };
        (x.round() as u64).max(k)
    }
}
