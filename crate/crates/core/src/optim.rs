//! Derivative-free minimisers used by the fitting modules.

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<F, X> {
    pub x: X,
    pub value: F,
    pub evaluations: usize,
    pub converged: bool,
}

/// Brent's method on `[lo, hi]` (golden section with parabolic steps).
pub fn brent<F: Real>(
    mut f: impl FnMut(F) -> F,
    lo: F,
    hi: F,
    tol: F,
    max_iter: usize,
) -> Minimum<F, F> {
    let golden = F::lit(0.381_966_011_250_105_1);
    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = F::zero();
    let mut e = F::zero();
    let mut evals = 1;
    let two = F::lit(2.0);
    let half = F::lit(0.5);
    let eps = F::epsilon().sqrt();

    for _ in 0..max_iter {
        let m = half * (a + b);
        let tol1 = eps * x.abs() + tol;
        let tol2 = two * tol1;
        if (x - m).abs() <= tol2 - half * (b - a) {
            return Minimum { x, value: fx, evaluations: evals, converged: true };
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > F::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (half * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= m { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > F::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum { x, value: fx, evaluations: evals, converged: false }
}

/// Grid scan over `[lo, hi]` followed by Brent refinement around the best
/// grid point. Guards against the multiple local minima that profile
/// objectives sometimes have.
pub fn scan_brent<F: Real>(
    mut f: impl FnMut(F) -> F,
    lo: F,
    hi: F,
    grid: usize,
    tol: F,
) -> Minimum<F, F> {
    let grid = grid.max(3);
    let step = (hi - lo) / F::from_count(grid as u64 - 1);
    let mut best = (0, F::infinity());
    for i in 0..grid {
        let x = lo + step * F::from_count(i as u64);
        let fx = f(x);
        if fx < best.1 || best.1.is_nan() {
            best = (i, fx);
        }
    }
    let a = lo + step * F::from_count(best.0.saturating_sub(1) as u64);
    let b = (lo + step * F::from_count((best.0 + 1).min(grid - 1) as u64)).min(hi);
    let mut m = brent(&mut f, a, b, tol, 200);
    if best.1 < m.value {
        m.x = lo + step * F::from_count(best.0 as u64);
        m.value = best.1;
    }
    m.evaluations += grid;
    m
}

/// Nelder–Mead simplex minimiser with standard coefficients.
pub fn nelder_mead<F: Real>(
    mut f: impl FnMut(&[F]) -> F,
    start: &[F],
    scale: &[F],
    ftol: F,
    max_evals: usize,
) -> Minimum<F, Vec<F>> {
    let n = start.len();
    let mut eval = |x: &[F], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            F::infinity()
        } else {
            v
        }
    };
    let mut evals = 0;
    let mut simplex: Vec<Vec<F>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] = p[i] + scale[i];
        simplex.push(p);
    }
    let mut values: Vec<F> = simplex.iter().map(|p| eval(p, &mut evals)).collect();
    let (alpha, gamma, rho, sigma) = (F::one(), F::lit(2.0), F::lit(0.5), F::lit(0.5));

    let mut converged = false;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        if spread <= ftol * (values[0].abs() + F::lit(1e-30)) + F::lit(1e-300) {
            let size = (1..=n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (simplex[i][j] - simplex[0][j]).abs())
                .fold(F::zero(), F::max);
            if size < F::lit(1e-10) || spread == F::zero() {
                converged = true;
                break;
            }
        }

        let centroid: Vec<F> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<F>() / F::from_count(n as u64))
            .collect();
        let along = |t: F| -> Vec<F> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let reflected = along(alpha);
        let fr = eval(&reflected, &mut evals);
        if fr < values[0] {
            let expanded = along(gamma);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = along(rho);
                let fc = eval(&c, &mut evals);
                (c, fc)
            } else {
                let c = along(-rho);
                let fc = eval(&c, &mut evals);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = best
                        .iter()
                        .zip(&simplex[i])
                        .map(|(&b, &x)| b + sigma * (x - b))
                        .collect();
                    values[i] = eval(&simplex[i], &mut evals);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_parabola_minimum() {
        let m = brent(|x: f64| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-12, 200);
        assert!(m.converged);
        assert!((m.x - 1.3).abs() < 1e-8);
        assert!((m.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn scan_brent_escapes_local_minimum() {
        let f = |x: f64| (x * 3.0).sin() + 0.1 * (x - 2.0).powi(2);
        let m = scan_brent(f, -6.0, 6.0, 200, 1e-12);
        let brute = (0..120_001)
            .map(|i| -6.0 + i as f64 * 1e-4)
            .map(|x| (f(x), x))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        assert!((m.x - brute.1).abs() < 1e-3);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], 1e-15, 20_000);
        assert!((m.x[0] - 1.0).abs() < 1e-5, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-5);
    }
}
