//! Fourier side: η̂, the infinite product ν̂(t) = Π η̂(tλ^n) with a certified
//! tail bound, the closed form of E|μ̂_n(t)|², its Monte-Carlo counterpart,
//! the shell upper bound, and truncated homogeneous Sobolev norms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParameterSet;
use crate::tree::{leaf_values, replica_seed, LabelOracle, LeafMode};

/// Largest number of factors taken in the product for ν̂.
pub const MAX_FACTORS: usize = 1_000_000;

/// Depth used as a stand-in for n = ∞ in E|μ̂_n|².
pub const LIMIT_DEPTH: usize = 40;

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub t: f64,
    pub value: Complex64,
    pub truncation_error: f64,
}

pub fn eta_hat(params: &ParameterSet, t: f64) -> Complex64 {
    params
        .digits()
        .iter()
        .map(|d| Complex64::from_polar(d.prob, t * d.value))
        .sum()
}

/// Number of factors N with max|d|·|t|·λ^(N+1)/(1−λ) ≤ tol.
fn factor_count(params: &ParameterSet, t: f64, tol: f64) -> Result<usize> {
    let lam = params.lambda();
    let scale = params.max_abs_digit() * t.abs();
    if scale == 0.0 {
        return Ok(0);
    }
    // λ^(N+1) ≤ tol(1−λ)/scale
    let need = ((tol * (1.0 - lam) / scale).ln() / lam.ln()).ceil() - 1.0;
    let n = need.max(0.0);
    if !(n <= MAX_FACTORS as f64) {
        return Err(Error::NonConvergent {
            t,
            limit: MAX_FACTORS,
        });
    }
    let mut n = n as usize;
    // guard against rounding in the logarithms
    while scale * lam.powi(n as i32 + 1) / (1.0 - lam) > tol {
        n += 1;
    }
    Ok(n)
}

fn tail_bound(params: &ParameterSet, t: f64, n: usize) -> f64 {
    let lam = params.lambda();
    params.max_abs_digit() * t.abs() * lam.powi(n as i32 + 1) / (1.0 - lam)
}

pub fn nu_hat(params: &ParameterSet, t: f64, tol: f64) -> Result<SpectrumSample> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = factor_count(params, t, tol)?;
    let lam = params.lambda();
    let mut s = t;
    let mut value = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        s *= lam;
        value *= eta_hat(params, s);
    }
    Ok(SpectrumSample {
        t,
        value,
        truncation_error: tail_bound(params, t, n),
    })
}

/// Product Π_{j=1}^{n} η̂(tλ^j) with exactly n factors.
pub fn nu_hat_partial(params: &ParameterSet, t: f64, n: usize) -> Complex64 {
    let lam = params.lambda();
    let mut s = t;
    let mut value = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        s *= lam;
        value *= eta_hat(params, s);
    }
    value
}

/// E|μ̂_n(t)|² = Σ_{k=0}^{n−1} (ℓ−1)ℓ^(−k−1) Π_{j=k+1}^{n} |η̂(tλ^j)|² + ℓ^(−n).
pub fn expected_mu_hat_sq(params: &ParameterSet, n: usize, t: f64) -> f64 {
    let l = params.arity() as f64;
    let lam = params.lambda();
    // suffix products P_{k+1} = Π_{j=k+1}^{n}, accumulated from j = n down
    let mut sq = vec![0.0; n + 1];
    for (j, slot) in sq.iter_mut().enumerate().skip(1) {
        *slot = eta_hat(params, t * lam.powi(j as i32)).norm_sqr();
    }
    let mut suffix = 1.0;
    let mut sum = 0.0;
    for k in (0..n).rev() {
        suffix *= sq[k + 1];
        sum += (l - 1.0) * l.powi(-(k as i32) - 1) * suffix;
    }
    sum + l.powi(-(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Monte-Carlo estimates of E|μ̂_n(t)|² at several frequencies, sharing the
/// same `reps` labelings across frequencies.
pub fn mc_mu_hat_sq_grid(
    params: &ParameterSet,
    n: usize,
    ts: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if reps < 100 {
        return Err(Error::InvalidParameter(format!(
            "Monte-Carlo estimate needs at least 100 replicas, got {reps}"
        )));
    }
    let samples: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            let o = LabelOracle::new(replica_seed(seed, k), params.clone());
            let vals = leaf_values(&o, n, LeafMode::Full)?;
            let m = vals.len() as f64;
            Ok(ts
                .iter()
                .map(|&t| {
                    let s: Complex64 = vals
                        .iter()
                        .map(|&x| Complex64::from_polar(1.0, t * x))
                        .sum();
                    (s / m).norm_sqr()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let r = reps as f64;
            let mean = samples.iter().map(|s| s[i]).sum::<f64>() / r;
            let var = samples.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (r - 1.0);
            McEstimate {
                t,
                estimate: mean,
                stderr: (var / r).sqrt(),
            }
        })
        .collect())
}

pub fn mc_mu_hat_sq(
    params: &ParameterSet,
    n: usize,
    t: f64,
    reps: usize,
    seed: u64,
) -> Result<McEstimate> {
    Ok(mc_mu_hat_sq_grid(params, n, &[t], reps, seed)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellBound {
    pub value: f64,
    /// Whether t lies in the shell [θ^(s−1), θ^s] where the bound applies.
    pub in_range: bool,
}

/// ℓ^(−s) + (ℓ−1) Σ_{k<s} ℓ^(−k−1) |ν̂(tλ^k)|².
pub fn mu_hat_sq_upper_bound(
    params: &ParameterSet,
    n: usize,
    s: usize,
    t: f64,
    tol: f64,
) -> Result<ShellBound> {
    if s < 1 || s + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "shell index must satisfy 1 <= s <= n-1, got s = {s}, n = {n}"
        )));
    }
    let l = params.arity() as f64;
    let lam = params.lambda();
    let mut value = l.powi(-(s as i32));
    for k in 0..s {
        let v = nu_hat(params, t * lam.powi(k as i32), tol)?
            .value
            .norm_sqr();
        value += (l - 1.0) * l.powi(-(k as i32) - 1) * v;
    }
    let theta = params.theta();
    let a = t.abs();
    let in_range =
        a >= theta.powi(s as i32 - 1) * (1.0 - 1e-12) && a <= theta.powi(s as i32) * (1.0 + 1e-12);
    Ok(ShellBound { value, in_range })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevEstimate {
    pub gamma: f64,
    pub t_max: f64,
    pub value: f64,
    pub converged: bool,
    /// Share of the value coming from t_max/10 ≤ |t| ≤ t_max.
    pub last_decade_fraction: f64,
}

/// Oscillation period of the fastest factor η̂(tλ).
fn fastest_period(params: &ParameterSet) -> f64 {
    let m = params.max_abs_digit().max(f64::MIN_POSITIVE);
    2.0 * PI / (params.lambda() * m)
}

/// Grid 0 = t_0 < … < t_N = t_max with uniform step at most `grid_step` and at
/// most 1/16 of the fastest oscillation period.
pub fn integration_grid(params: &ParameterSet, t_max: f64, grid_step: f64) -> Vec<f64> {
    let h = grid_step.min(fastest_period(params) / 16.0);
    let n = (t_max / h).ceil() as usize;
    let h = t_max / n as f64;
    (0..=n).map(|i| i as f64 * h).collect()
}

/// Trapezoid rule on a grid; returns cumulative integrals at each node.
fn cumulative_trapezoid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    let mut comp = 0.0;
    out.push(0.0);
    for i in 1..ts.len() {
        // Kahan summation
        let term = 0.5 * (ts[i] - ts[i - 1]) * (ys[i] + ys[i - 1]) - comp;
        let next = acc + term;
        comp = (next - acc) - term;
        acc = next;
        out.push(acc);
    }
    out
}

fn weight(t: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        t.abs().powf(2.0 * gamma)
    }
}

fn check_sobolev(gamma: f64, t_max: f64, grid_step: f64) -> Result<()> {
    if !(gamma >= 0.0) || !(t_max > 1.0) || !(grid_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need gamma >= 0, t_max > 1 and grid_step > 0 (got {gamma}, {t_max}, {grid_step})"
        )));
    }
    Ok(())
}

/// ∫_{−t_max}^{t_max} |ν̂(t)|² |t|^(2γ) dt by the trapezoid rule.
pub fn sobolev_norm(
    params: &ParameterSet,
    gamma: f64,
    t_max: f64,
    grid_step: f64,
) -> Result<SobolevEstimate> {
    check_sobolev(gamma, t_max, grid_step)?;
    let ts = integration_grid(params, t_max, grid_step);
    let ys: Vec<f64> = ts
        .par_iter()
        .map(|&t| Ok(nu_hat(params, t, DEFAULT_TOL)?.value.norm_sqr() * weight(t, gamma)))
        .collect::<Result<_>>()?;
    let cum = cumulative_trapezoid(&ts, &ys);
    let total = 2.0 * cum[cum.len() - 1];
    let i = ts.partition_point(|&t| t < t_max / 10.0);
    let last = 2.0 * (cum[cum.len() - 1] - cum[i]);
    let frac = if total > 0.0 { last / total } else { 0.0 };
    Ok(SobolevEstimate {
        gamma,
        t_max,
        value: total,
        converged: frac < 0.01,
        last_decade_fraction: frac,
    })
}

/// Constants (C₁, C₂) with E‖μ‖²_{2,γ} ≤ C₁ + C₂‖ν‖²_{2,γ}, obtained by
/// splitting frequencies into shells [θ^(s−1), θ^s]; needs λ^(1+2γ) > 1/ℓ.
pub fn sobolev_comparison_constants(params: &ParameterSet, gamma: f64) -> Result<(f64, f64)> {
    let l = params.arity() as f64;
    let lam = params.lambda();
    let e = 1.0 + 2.0 * gamma;
    let r = l * lam.powf(e);
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda^(1+2 gamma) = {} is not above 1/arity",
            lam.powf(e)
        )));
    }
    let theta = 1.0 / lam;
    // |t| < 1 contributes at most ∫ |t|^(2γ) = 2/(1+2γ); shell s at most
    // 2 ℓ^(−s) (θ^(se) − θ^((s−1)e))/e, a geometric series with ratio θ^e/ℓ
    let q = theta.powf(e) / l;
    let c1 = 2.0 / e + 2.0 / e * (1.0 - 1.0 / theta.powf(e)) * q / (1.0 - q);
    let c2 = (l - 1.0) / l / (1.0 - 1.0 / r);
    Ok((c1, c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPoint {
    pub t_max: f64,
    /// ∫ E|μ̂_n|² |t|^(2γ) over [−t_max, t_max] at n = LIMIT_DEPTH.
    pub moment_integral: f64,
    /// ∫ |ν̂|² |t|^(2γ) over the same range.
    pub nu_integral: f64,
}

/// Both truncated integrals on one shared grid, at each requested t_max.
pub fn sobolev_comparison(
    params: &ParameterSet,
    gamma: f64,
    t_maxes: &[f64],
    grid_step: f64,
) -> Result<Vec<ComparisonPoint>> {
    let top = t_maxes.iter().copied().fold(0.0, f64::max);
    check_sobolev(gamma, top, grid_step)?;
    let ts = integration_grid(params, top, grid_step);
    let pairs: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let w = weight(t, gamma);
            Ok((
                expected_mu_hat_sq(params, LIMIT_DEPTH, t) * w,
                nu_hat(params, t, DEFAULT_TOL)?.value.norm_sqr() * w,
            ))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ca = cumulative_trapezoid(&ts, &a);
    let cb = cumulative_trapezoid(&ts, &b);
    Ok(t_maxes
        .iter()
        .map(|&tm| {
            let i = ts.partition_point(|&t| t <= tm).saturating_sub(1);
            ComparisonPoint {
                t_max: ts[i],
                moment_integral: 2.0 * ca[i],
                nu_integral: 2.0 * cb[i],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::uniform_digits;

    #[test]
    fn eta_hat_values() {
        let p = ParameterSet::bernoulli(0.7).unwrap();
        assert_eq!(eta_hat(&p, 0.0), Complex64::new(1.0, 0.0));
        assert!((eta_hat(&p, 2.0 * PI) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(eta_hat(&p, PI).norm() < 1e-15);
        for t in [0.3, 1.7, 11.0] {
            assert!((eta_hat(&p, t).norm() - (t / 2.0).cos().abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn nu_hat_at_zero_and_symmetry() {
        let p = ParameterSet::new(0.6, 2, uniform_digits(&[-1.0, 0.3, 2.0])).unwrap();
        let z = nu_hat(&p, 0.0, 1e-12).unwrap();
        assert_eq!(z.value, Complex64::new(1.0, 0.0));
        assert_eq!(z.truncation_error, 0.0);
        for t in [0.5, 3.0, 40.0] {
            let a = nu_hat(&p, t, 1e-12).unwrap().value;
            let b = nu_hat(&p, -t, 1e-12).unwrap().value;
            assert!((a - b.conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn astronomical_t_is_non_convergent() {
        let p = ParameterSet::bernoulli(1.0 - 1e-9).unwrap();
        assert!(matches!(
            nu_hat(&p, 1e6, 1e-12),
            Err(Error::NonConvergent { .. })
        ));
    }

    #[test]
    fn closed_form_matches_pair_enumeration() {
        // direct double sum over leaf pairs grouped by common-prefix length
        let p = ParameterSet::new(0.55, 3, uniform_digits(&[0.0, 1.0])).unwrap();
        let (n, t) = (4usize, 3.1);
        let l = 3.0f64;
        let mut direct = 0.0;
        for k in 0..=n {
            let pairs = if k == n {
                l.powi(n as i32)
            } else {
                l.powi(n as i32) * (l - 1.0) * l.powi((n - k - 1) as i32)
            };
            let prod: f64 = (k + 1..=n)
                .map(|j| eta_hat(&p, t * 0.55f64.powi(j as i32)).norm_sqr())
                .product();
            direct += pairs * prod;
        }
        direct /= l.powi(2 * n as i32);
        assert!((direct - expected_mu_hat_sq(&p, n, t)).abs() < 1e-14);
    }

    #[test]
    fn upper_bound_at_zero_is_one() {
        let p = ParameterSet::bernoulli(0.7).unwrap();
        let b = mu_hat_sq_upper_bound(&p, 5, 1, 0.0, 1e-12).unwrap();
        assert!((b.value - 1.0).abs() < 1e-15);
        assert!(!b.in_range);
        assert!(mu_hat_sq_upper_bound(&p, 5, 5, 1.0, 1e-12).is_err());
    }

    #[test]
    fn mc_at_zero_is_exactly_one() {
        let p = ParameterSet::bernoulli(0.7).unwrap();
        let e = mc_mu_hat_sq(&p, 5, 0.0, 100, 3).unwrap();
        assert_eq!((e.estimate, e.stderr), (1.0, 0.0));
    }

    #[test]
    fn sobolev_integrand_vanishes_at_origin() {
        assert_eq!(weight(0.0, 0.5), 0.0);
        let p = ParameterSet::bernoulli(0.7).unwrap();
        let a = sobolev_norm(&p, 0.2, 50.0, 0.1).unwrap();
        let b = sobolev_norm(&p, 0.2, 100.0, 0.1).unwrap();
        assert!(a.value >= 0.0 && b.value >= a.value);
    }
}
