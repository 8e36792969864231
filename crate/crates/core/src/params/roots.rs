//! Simultaneous root finding (Aberth–Ehrlich) for integer polynomials.

use num_complex::Complex64;

use super::poly::IntPolynomial;
use crate::error::{Error, Result};

/// Residual target relative to the polynomial's coefficient scale.
pub const RESIDUAL_TARGET: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 500;

/// All complex roots of a monic polynomial, sorted by decreasing real part
/// and then by imaginary part.
pub fn roots(poly: &IntPolynomial) -> Result<Vec<Complex64>> {
    let n = poly.degree();
    let lead = poly.leading() as f64;
    let coeffs: Vec<f64> = poly.coeffs().iter().map(|&c| c as f64 / lead).collect();

    // Cauchy bound on root moduli.
    let radius = 1.0 + coeffs[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();

    let eval = |x: Complex64| -> (Complex64, Complex64, f64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        let r = x.norm();
        for &c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
            scale = scale * r + c.abs();
        }
        (p, dp, scale)
    };

    let mut worst = f64::INFINITY;
    for iter in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        worst = 0.0;
        for i in 0..n {
            let (p, dp, scale) = eval(z[i]);
            worst = worst.max(p.norm() / scale.max(1.0));
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if worst <= RESIDUAL_TARGET && max_step <= 1e-14 {
            break;
        }
        if iter + 1 == MAX_ITERATIONS {
            return Err(Error::RootFindingFailure {
                iterations: MAX_ITERATIONS,
                residual: worst,
            });
        }
    }

    // Final Newton polish on each root.
    for root in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = eval(*root);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.is_finite() {
                *root -= step;
            }
        }
        if root.im.abs() <= 1e-14 * root.norm().max(1.0) {
            root.im = 0.0;
        }
    }
    if !z.iter().all(|r| r.is_finite()) {
        return Err(Error::RootFindingFailure {
            iterations: MAX_ITERATIONS,
            residual: worst,
        });
    }
    z.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

/// Refines a simple real root by Newton's method in `f64`.
pub fn polish_real_root(poly: &IntPolynomial, x0: f64) -> f64 {
    let mut x = x0;
    for _ in 0..8 {
        let z = Complex64::new(x, 0.0);
        let p = poly.eval_complex(z).re;
        let dp = poly.derivative_complex(z).re;
        if dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() || next == x {
            break;
        }
        x = next;
    }
    x
}
