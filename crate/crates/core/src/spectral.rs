//! Numeric checks on the characteristic polynomial of the run recurrence.
//!
//! This is the only module that uses floating point. Every reported root
//! carries its residual so callers can judge it.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::rational::to_f64;
use crate::transfer::build_w;

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
pub const DEFAULT_RHO_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Integer polynomial, coefficients in ascending powers of `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct IntPoly(Vec<i64>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval_int(&self, x: i64) -> i128 {
        self.0.iter().rev().fold(0i128, |acc, &c| acc * i128::from(x) + i128::from(c))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = vec![0i64; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (power, &c) in self.0.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.unsigned_abs();
            match (power, mag) {
                (0, _) => write!(f, "{mag}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{mag}x")?,
                (_, 1) => write!(f, "x^{power}")?,
                _ => write!(f, "{mag}x^{power}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `x^n - (m-1) * (x^(n-1) + ... + x + 1)`.
pub fn char_poly(params: Params) -> Result<IntPoly> {
    params.require_alphabet(2)?;
    let n = params.n() as usize;
    let mut coeffs = vec![-i64::from(params.m() - 1); n + 1];
    coeffs[n] = 1;
    Ok(IntPoly::new(coeffs))
}

/// `-x^(n+1) + m x^n - (m-1)`, which equals `-(x - 1) * char_poly`.
pub fn transformed_poly(params: Params) -> Result<IntPoly> {
    params.require_alphabet(2)?;
    let n = params.n() as usize;
    let mut coeffs = vec![0i64; n + 2];
    coeffs[0] = -i64::from(params.m() - 1);
    coeffs[n] = i64::from(params.m());
    coeffs[n + 1] = -1;
    let poly = IntPoly::new(coeffs);
    debug_assert_eq!(poly.eval_int(1), 0);
    Ok(poly)
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `|p(z)| / (1 + |z|^(deg+1))`.
pub fn scaled_residual(coeffs: &[f64], z: Complex64) -> f64 {
    let deg = coeffs.len() as i32 - 1;
    horner(coeffs, z).0.norm() / (1.0 + z.norm().powi(deg + 1))
}

pub fn find_roots(coeffs: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    find_roots_with_budget(coeffs, tol, DEFAULT_MAX_ITER)
}

/// All complex roots by Aberth-Ehrlich simultaneous iteration.
///
/// Starting points sit on a circle of radius `1 + max|c_i| / |c_lead|`
/// (Cauchy's bound) at a fixed angular offset, and updates run in index
/// order, so the output is a deterministic function of the input. Roots are
/// returned by decreasing modulus. Fails if any scaled residual exceeds
/// `tol` after the iteration budget.
pub fn find_roots_with_budget(coeffs: &[f64], tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Err(Error::domain("polynomial", format!("{coeffs:?}"), "degree must be at least 1"));
    }
    let lead = coeffs[deg];
    let radius = 1.0 + coeffs[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, TAU * k as f64 / deg as f64 + 0.4))
        .collect();

    let mut iterations = 0;
    let mut quiet_sweeps = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut max_step = 0.0f64;
        for k in 0..deg {
            let (p, dp) = horner(&coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() == 0.0 { p / 1e-300 } else { p / dp };
            let repulsion: Complex64 = (0..deg).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = newton / (1.0 - newton * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
        // Multiple roots converge only linearly and their iterates jitter at
        // the sqrt(eps) level; accept once residuals have settled.
        if z.iter().all(|&r| scaled_residual(&coeffs, r) <= tol * 1e-4) {
            quiet_sweeps += 1;
            if quiet_sweeps >= 3 {
                break;
            }
        } else {
            quiet_sweeps = 0;
        }
    }

    let worst = z.iter().map(|&r| scaled_residual(&coeffs, r)).fold(0.0, f64::max);
    if worst.is_nan() || worst > tol {
        return Err(Error::NoConvergence {
            iterations,
            worst_residual: worst,
        });
    }
    z.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
    Ok(z)
}

/// Largest distance in a greedy nearest-neighbour matching of two root
/// multisets; `f64::INFINITY` if their sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut unused: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0f64;
    for &x in a {
        let (idx, dist) = unused
            .iter()
            .enumerate()
            .map(|(i, &y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes match");
        worst = worst.max(dist);
        unused.swap_remove(idx);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub residual_tol: f64,
    /// The bound holds only if `m - max_modulus > margin_tol`.
    pub margin_tol: f64,
    pub rho_tol: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            residual_tol: DEFAULT_RESIDUAL_TOL,
            margin_tol: 0.0,
            rho_tol: DEFAULT_RHO_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// `|p(z)|`.
    pub residual: f64,
    /// `|p(z)| / (1 + |z|^(deg+1))`.
    pub scaled_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub params: Params,
    pub char_coeffs: IntPoly,
    pub transformed_coeffs: IntPoly,
    pub roots: Vec<RootEntry>,
    pub max_modulus: f64,
    pub margin: f64,
    pub rho_estimate: f64,
    pub rho_bound_ok: bool,
}

impl RootReport {
    pub fn complex_roots(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| Complex64::new(r.re, r.im)).collect()
    }
}

/// Roots of the characteristic polynomial with the strict-bound diagnostics.
/// Never fails on the bound itself; see [`verify_root_bound`].
pub fn root_report(params: Params, opts: RootOptions) -> Result<RootReport> {
    let char_coeffs = char_poly(params)?;
    let transformed_coeffs = transformed_poly(params)?;
    let coeffs = char_coeffs.to_f64();
    let roots = find_roots(&coeffs, opts.residual_tol)?;
    let max_modulus = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let m = f64::from(params.m());
    let margin = m - max_modulus;
    let rho_estimate = spectral_radius_estimate(params, opts.rho_tol)?;
    let rho_bound_ok =
        margin > opts.margin_tol && rho_estimate < 1.0 && (rho_estimate - max_modulus / m).abs() < opts.rho_tol;
    let roots = roots
        .into_iter()
        .map(|z| RootEntry {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
            residual: horner(&coeffs, z).0.norm(),
            scaled_residual: scaled_residual(&coeffs, z),
        })
        .collect();
    Ok(RootReport {
        params,
        char_coeffs,
        transformed_coeffs,
        roots,
        max_modulus,
        margin,
        rho_estimate,
        rho_bound_ok,
    })
}

/// [`root_report`], failing with [`Error::RootBound`] unless every root has
/// modulus below `m` by more than `opts.margin_tol` and the spectral-radius
/// estimate agrees with `max_modulus / m`.
pub fn verify_root_bound(params: Params, opts: RootOptions) -> Result<RootReport> {
    let report = root_report(params, opts)?;
    if !report.rho_bound_ok {
        return Err(Error::RootBound {
            m: params.m(),
            n: params.n(),
            max_modulus: report.max_modulus,
            margin: report.margin,
        });
    }
    Ok(report)
}

fn power_iteration(w: &[Vec<f64>], start: Vec<f64>, max_iter: usize) -> Result<f64> {
    let norm1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let s = norm1(&start);
    let mut v: Vec<f64> = start.into_iter().map(|x| x / s).collect();
    let mut prev = f64::NAN;
    let mut stable = 0;
    for _ in 0..max_iter {
        let next: Vec<f64> = w.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let est = norm1(&next);
        if est == 0.0 {
            return Ok(0.0);
        }
        if (est - prev).abs() <= 1e-15 * est.max(1.0) {
            stable += 1;
            if stable >= 5 {
                return Ok(est);
            }
        } else {
            stable = 0;
        }
        prev = est;
        v = next.into_iter().map(|x| x / est).collect();
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        worst_residual: f64::NAN,
    })
}

/// Power-iteration estimate of `rho(W)` on a float copy of `W`, run from two
/// strictly positive start vectors that must agree within `tol`.
pub fn spectral_radius_estimate(params: Params, tol: f64) -> Result<f64> {
    let w = build_w(params)?.to_f64_rows();
    let size = w.len();
    let uniform = vec![1.0; size];
    let ramp: Vec<f64> = (1..=size).map(|i| i as f64).collect();
    let a = power_iteration(&w, uniform, 100 * DEFAULT_MAX_ITER)?;
    let b = power_iteration(&w, ramp, 100 * DEFAULT_MAX_ITER)?;
    if (a - b).abs() > tol {
        return Err(Error::NoConvergence {
            iterations: 100 * DEFAULT_MAX_ITER,
            worst_residual: (a - b).abs(),
        });
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrobeniusReport {
    pub params: Params,
    /// `||W^k||_F` for `k = 1..=K`.
    pub norms: Vec<f64>,
    /// `exp` of the least-squares slope of `ln ||W^k||_F` over `k in K/2..=K`.
    pub fitted_ratio: f64,
    /// `max_modulus / m`.
    pub expected_ratio: f64,
    /// Envelope constant fitted on the first half of the range.
    pub constant: f64,
    pub holds: bool,
}

/// Checks that `||W^k||_F` (computed exactly, then rounded) decays
/// geometrically at rate `max_modulus / m`.
///
/// Holds iff the fitted ratio is at most `expected + tol` and the second half
/// of the norms stays under the envelope `C * expected^k` fitted on the first
/// half, with relative slack `tol`.
pub fn frobenius_growth_check(params: Params, k_max: usize, tol: f64) -> Result<FrobeniusReport> {
    if k_max < 2 {
        return Err(Error::domain("K", k_max, "need at least two powers to fit a rate"));
    }
    let w = build_w(params)?;
    let mut power = w.clone();
    let mut norms = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        norms.push(to_f64(&power.frobenius_norm_squared()).sqrt());
        power = &power * &w;
    }
    let roots = find_roots(&char_poly(params)?.to_f64(), DEFAULT_RESIDUAL_TOL)?;
    let expected_ratio = roots.iter().map(|r| r.norm()).fold(0.0, f64::max) / f64::from(params.m());

    let half = k_max / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (half..=k_max).map(|k| (k as f64, norms[k - 1].ln())).unzip();
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let fitted_ratio = (sxy / sxx).exp();

    let envelope = |k: usize| expected_ratio.powi(k as i32);
    let constant = (1..=half).map(|k| norms[k - 1] / envelope(k)).fold(0.0, f64::max);
    let bounded = (half..=k_max).all(|k| norms[k - 1] <= constant * envelope(k) * (1.0 + tol));
    Ok(FrobeniusReport {
        params,
        norms,
        fitted_ratio,
        expected_ratio,
        constant,
        holds: bounded && fitted_ratio <= expected_ratio + tol,
    })
}
