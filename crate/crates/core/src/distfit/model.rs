//! Discretised candidate distributions.
//!
//! Every family is a continuous density `f(x)` evaluated at integer
//! `x = k + 1 ≥ x_min` and renormalised by `Z(x_min) = Σ_{x ≥ x_min} f(x)`.
//! The sum is taken directly up to a cutoff `K` past which `f` is smooth on
//! the unit scale, and the remainder comes from the Euler–Maclaurin formula
//!
//! ```text
//! Σ_{x≥K} f(x) = ∫_K^∞ f + f(K)/2 − f'(K)/12 + f'''(K)/720 − …
//! ```
//!
//! with the integral in closed form. The first omitted term is of order
//! `f^(5)(K)/30240`, below `1e-12` relative for the cutoffs used here. The
//! exponential family is summed exactly as a geometric series.

use serde::{Deserialize, Serialize};

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LogNormal,
    PowerLaw,
    Exponential,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::LogNormal, Family::PowerLaw, Family::Exponential];

    pub fn name(&self) -> &'static str {
        match self {
            Family::LogNormal => "log_normal",
            Family::PowerLaw => "power_law",
            Family::Exponential => "exponential",
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Family::LogNormal => 2,
            Family::PowerLaw | Family::Exponential => 1,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "lognormal" => Ok(Family::LogNormal),
            "powerlaw" => Ok(Family::PowerLaw),
            "exponential" | "exp" => Ok(Family::Exponential),
            _ => Err(crate::Error::Config(format!("unknown distribution family {s:?}"))),
        }
    }
}

/// A parameterised candidate form. Densities are in terms of `x = k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionModel<F> {
    LogNormal { mu: F, sigma: F },
    PowerLaw { gamma: F },
    Exponential { lambda: F },
}

/// Natural log of the standard normal upper tail `Q(z) = P(Z > z)`.
pub(crate) fn ln_normal_sf(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)).ln()
    } else {
        // Asymptotic series; relative error below 1e-12 for z ≥ 30.
        let z2 = z * z;
        -0.5 * z2 - (z * (2.0 * std::f64::consts::PI).sqrt()).ln()
            + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2)).ln()
    }
}

/// Adds `exp(a)` and `exp(b)` in log space.
fn log_add<F: Real>(a: F, b: F) -> F {
    if a == F::neg_infinity() {
        return b;
    }
    if b == F::neg_infinity() {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl<F: Real> DistributionModel<F> {
    pub fn family(&self) -> Family {
        match self {
            DistributionModel::LogNormal { .. } => Family::LogNormal,
            DistributionModel::PowerLaw { .. } => Family::PowerLaw,
            DistributionModel::Exponential { .. } => Family::Exponential,
        }
    }

    pub fn params(&self) -> Vec<F> {
        match *self {
            DistributionModel::LogNormal { mu, sigma } => vec![mu, sigma],
            DistributionModel::PowerLaw { gamma } => vec![gamma],
            DistributionModel::Exponential { lambda } => vec![lambda],
        }
    }

    pub fn with_params(family: Family, p: &[F]) -> Self {
        match family {
            Family::LogNormal => DistributionModel::LogNormal { mu: p[0], sigma: p[1] },
            Family::PowerLaw => DistributionModel::PowerLaw { gamma: p[0] },
            Family::Exponential => DistributionModel::Exponential { lambda: p[0] },
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            DistributionModel::LogNormal { mu, sigma } => mu.is_finite() && sigma > F::zero() && sigma.is_finite(),
            DistributionModel::PowerLaw { gamma } => gamma > F::one() && gamma.is_finite(),
            DistributionModel::Exponential { lambda } => lambda > F::zero() && lambda.is_finite(),
        }
    }

    /// `ln f(x)` of the undiscretised density.
    pub fn log_density(&self, x: F) -> F {
        match *self {
            DistributionModel::LogNormal { mu, sigma } => {
                let lx = x.ln();
                let z = (lx - mu) / sigma;
                -lx - sigma.ln() - F::lit(0.5) * (F::TAU()).ln() - F::lit(0.5) * z * z
            }
            DistributionModel::PowerLaw { gamma } => -gamma * x.ln(),
            DistributionModel::Exponential { lambda } => lambda.ln() - lambda * x,
        }
    }

    fn smooth_cutoff(&self, xmin: u64) -> u64 {
        match *self {
            DistributionModel::LogNormal { sigma, .. } => {
                let s = sigma.as_f64();
                let need = (12.0 / s).ceil().min(1e7) as u64;
                (xmin + 48).max(need).max(64)
            }
            _ => (xmin + 48).max(64),
        }
    }

    /// `ln ∫_K^∞ f(x) dx` and the Euler–Maclaurin correction factor `c`
    /// such that `Σ_{x≥K} f(x) ≈ ∫ + f(K)·c`.
    fn tail_terms(&self, k: F) -> (F, F) {
        let half = F::lit(0.5);
        match *self {
            DistributionModel::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                let u = (k.ln() - mu) / s2;
                let g1 = -(F::one() + u) / k;
                let g2 = (F::one() + u - F::one() / s2) / (k * k);
                let g3 = (F::lit(3.0) / s2 - F::lit(2.0) * (F::one() + u)) / (k * k * k);
                let d1 = g1;
                let d3 = g3 + F::lit(3.0) * g1 * g2 + g1 * g1 * g1;
                let z = ((k.ln() - mu) / sigma).as_f64();
                (F::lit(ln_normal_sf(z)), half - d1 / F::lit(12.0) + d3 / F::lit(720.0))
            }
            DistributionModel::PowerLaw { gamma } => {
                let gm1 = gamma - F::one();
                let ln_int = -gm1 * k.ln() - gm1.ln();
                let d1 = -gamma / k;
                let d3 = -gamma * (gamma + F::one()) * (gamma + F::lit(2.0)) / (k * k * k);
                (ln_int, half - d1 / F::lit(12.0) + d3 / F::lit(720.0))
            }
            DistributionModel::Exponential { .. } => unreachable!("summed exactly"),
        }
    }

    /// `ln Z(x_min)`, the log of the normaliser over `x ≥ x_min`.
    pub fn log_norm(&self, xmin: u64) -> F {
        debug_assert!(xmin >= 1);
        if let DistributionModel::Exponential { lambda } = *self {
            // Σ_{x≥a} λe^{−λx} = λe^{−λa} / (1 − e^{−λ})
            return lambda.ln() - lambda * F::from_count(xmin) - (-(-lambda).exp_m1()).ln();
        }
        let cutoff = self.smooth_cutoff(xmin);
        let mut acc = F::neg_infinity();
        // Direct part, in blocks so the log-sum stays cheap.
        let mut block_max = F::neg_infinity();
        let mut block: Vec<F> = Vec::with_capacity(64);
        let flush = |block: &mut Vec<F>, block_max: &mut F, acc: &mut F| {
            if block.is_empty() {
                return;
            }
            let m = *block_max;
            let s: F = block.iter().map(|&v| (v - m).exp()).sum();
            *acc = log_add(*acc, m + s.ln());
            block.clear();
            *block_max = F::neg_infinity();
        };
        for x in xmin..cutoff {
            let v = self.log_density(F::from_count(x));
            block_max = block_max.max(v);
            block.push(v);
            if block.len() == 64 {
                flush(&mut block, &mut block_max, &mut acc);
            }
        }
        flush(&mut block, &mut block_max, &mut acc);
        let k = F::from_count(cutoff);
        let (ln_int, c) = self.tail_terms(k);
        let ln_fk = self.log_density(k);
        acc = log_add(acc, ln_int);
        if c > F::zero() {
            acc = log_add(acc, ln_fk + c.ln());
        } else {
            acc = acc + (-(ln_fk - acc).exp() * c.abs()).ln_1p();
        }
        acc
    }

    /// `ln P(X = x)` on the support `x ≥ x_min`, given `ln Z(x_min)`.
    #[inline]
    pub fn log_pmf_with(&self, x: u64, log_norm: F) -> F {
        self.log_density(F::from_count(x)) - log_norm
    }

    pub fn log_pmf(&self, x: u64, xmin: u64) -> F {
        if x < xmin {
            return F::neg_infinity();
        }
        self.log_pmf_with(x, self.log_norm(xmin))
    }

    pub fn pmf(&self, x: u64, xmin: u64) -> F {
        self.log_pmf(x, xmin).exp()
    }

    /// `P(X ≥ x)` on the support `x ≥ x_min`.
    pub fn survival(&self, x: u64, xmin: u64) -> F {
        if x <= xmin {
            return F::one();
        }
        (self.log_norm(x) - self.log_norm(xmin)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_sum(m: &DistributionModel<f64>, xmin: u64, upto: u64) -> f64 {
        // Kahan summation from the small end.
        let mut s = 0.0f64;
        let mut c = 0.0f64;
        for x in (xmin..upto).rev() {
            let y = m.log_density(x as f64).exp() - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s
    }

    #[test]
    fn lognormal_normaliser_matches_direct_sum() {
        for &(mu, sigma, xmin) in &[(1.41, 1.27, 1u64), (-1.0, 1.76, 20), (3.0, 0.3, 1), (0.5, 2.5, 5)] {
            let m = DistributionModel::<f64>::LogNormal { mu, sigma };
            let upto = 4_000_000;
            let tail = m.log_norm(upto).exp();
            let direct = direct_sum(&m, xmin, upto) + tail;
            let z = m.log_norm(xmin).exp();
            assert!(((z - direct) / direct).abs() < 1e-10, "{mu} {sigma} {xmin}: {z} vs {direct}");
        }
    }

    #[test]
    fn power_law_normaliser_matches_hurwitz_zeta() {
        // ζ(3) = 1.2020569031595942, ζ(2) = π²/6.
        let z3 = DistributionModel::<f64>::PowerLaw { gamma: 3.0 }.log_norm(1).exp();
        assert!((z3 - 1.202_056_903_159_594_2).abs() < 1e-13);
        let z2 = DistributionModel::<f64>::PowerLaw { gamma: 2.0 }.log_norm(1).exp();
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        // ζ(2, 44) = ψ'(44); compare against direct summation plus asymptotic tail.
        let m = DistributionModel::PowerLaw { gamma: 2.87 };
        let upto = 1_000_000u64;
        let tail = (upto as f64).powf(-1.87) / 1.87 + 0.5 * (upto as f64).powf(-2.87);
        let direct = direct_sum(&m, 44, upto) + tail;
        assert!(((m.log_norm(44).exp() - direct) / direct).abs() < 1e-11);
    }

    #[test]
    fn exponential_normaliser_is_geometric() {
        let m = DistributionModel::Exponential { lambda: 0.7 };
        let direct = direct_sum(&m, 3, 400);
        assert!((m.log_norm(3).exp() - direct).abs() < 1e-15);
    }

    #[test]
    fn survival_at_xmin_is_one() {
        let m = DistributionModel::<f64>::PowerLaw { gamma: 2.5 };
        assert_eq!(m.survival(10, 10), 1.0);
        let s = m.survival(11, 10);
        assert!((s - (1.0 - m.pmf(10, 10))).abs() < 1e-13);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("lognormal".parse::<Family>().unwrap(), Family::LogNormal);
        assert_eq!("power-law".parse::<Family>().unwrap(), Family::PowerLaw);
        assert!("gamma".parse::<Family>().is_err());
    }
}
