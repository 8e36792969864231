//! Exact arithmetic in ℤ[θ] = ℤ[x]/(p), where p is the minimal polynomial of θ.
//!
//! Values are coefficient vectors of length `deg p` (constant term first).
//! Because p is monic the remainder of any integer polynomial is again an
//! integer polynomial, so the representation is canonical: two values are
//! equal iff their coefficient vectors are equal. Real embeddings go through
//! the dominant root θ; signs of nonzero values are resolved in `f64` with an
//! error bound and fall back to double-double evaluation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::dd::DoubleDouble;
use super::poly::IntPolynomial;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlgebraicValue {
    pub coeffs: Vec<i64>,
}

impl AlgebraicValue {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// θ^(−scale) · numer. Digit sums Σ_{j≤n} a_j λ^j are stored with scale n
/// and numerator Σ_j a_j θ^(n−j).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaledValue {
    pub numer: AlgebraicValue,
    pub scale: u32,
}

/// Arithmetic context for ℤ[θ].
#[derive(Debug, Clone)]
pub struct ThetaRing {
    min_poly: IntPolynomial,
    theta: f64,
    theta_dd: DoubleDouble,
    // θ^i for i < deg, used by the f64 embedding
    powers: Vec<f64>,
}

fn checked(v: Option<i64>) -> Result<i64> {
    v.ok_or(Error::DegreeOverflow)
}

impl ThetaRing {
    /// `theta` must be a simple real root of the monic `min_poly`; it is
    /// refined to double-double precision here.
    pub fn new(min_poly: IntPolynomial, theta: f64) -> Result<Self> {
        if !min_poly.is_monic() {
            return Err(Error::NonMonic(min_poly.leading()));
        }
        let theta_dd = refine_dd(&min_poly, theta);
        let deg = min_poly.degree();
        let theta = theta_dd.to_f64();
        let powers = (0..deg).map(|i| theta.powi(i as i32)).collect();
        Ok(ThetaRing {
            min_poly,
            theta,
            theta_dd,
            powers,
        })
    }

    pub fn min_poly(&self) -> &IntPolynomial {
        &self.min_poly
    }

    pub fn degree(&self) -> usize {
        self.min_poly.degree()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn zero(&self) -> AlgebraicValue {
        AlgebraicValue {
            coeffs: vec![0; self.degree()],
        }
    }

    pub fn from_int(&self, k: i64) -> AlgebraicValue {
        let mut v = self.zero();
        v.coeffs[0] = k;
        v
    }

    /// Remainder of an arbitrary integer polynomial in θ (constant first).
    pub fn reduce(&self, coeffs: &[i64]) -> Result<AlgebraicValue> {
        let deg = self.degree();
        let p = self.min_poly.coeffs();
        let mut work = coeffs.to_vec();
        if work.len() < deg {
            work.resize(deg, 0);
        }
        for top in (deg..work.len()).rev() {
            let c = work[top];
            if c == 0 {
                continue;
            }
            work[top] = 0;
            // θ^top = θ^(top-deg) · θ^deg and θ^deg = −Σ_{i<deg} p_i θ^i
            let shift = top - deg;
            for (i, &pi) in p[..deg].iter().enumerate() {
                let delta = checked(c.checked_mul(pi))?;
                work[shift + i] = checked(work[shift + i].checked_sub(delta))?;
            }
        }
        work.truncate(deg);
        Ok(AlgebraicValue { coeffs: work })
    }

    pub fn mul_theta(&self, v: &AlgebraicValue) -> Result<AlgebraicValue> {
        let deg = self.degree();
        let p = self.min_poly.coeffs();
        let top = v.coeffs[deg - 1];
        let mut out = vec![0i64; deg];
        for i in (1..deg).rev() {
            out[i] = v.coeffs[i - 1];
        }
        if top != 0 {
            for i in 0..deg {
                let delta = checked(top.checked_mul(p[i]))?;
                out[i] = checked(out[i].checked_sub(delta))?;
            }
        }
        Ok(AlgebraicValue { coeffs: out })
    }

    /// θ·v + k, the step that appends one digit to a scaled digit sum.
    pub fn shift_add(&self, v: &AlgebraicValue, k: i64) -> Result<AlgebraicValue> {
        let mut out = self.mul_theta(v)?;
        out.coeffs[0] = checked(out.coeffs[0].checked_add(k))?;
        Ok(out)
    }

    pub fn add(&self, a: &AlgebraicValue, b: &AlgebraicValue) -> Result<AlgebraicValue> {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| checked(x.checked_add(*y)))
            .collect::<Result<_>>()?;
        Ok(AlgebraicValue { coeffs })
    }

    pub fn sub(&self, a: &AlgebraicValue, b: &AlgebraicValue) -> Result<AlgebraicValue> {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| checked(x.checked_sub(*y)))
            .collect::<Result<_>>()?;
        Ok(AlgebraicValue { coeffs })
    }

    pub fn scale_int(&self, a: &AlgebraicValue, k: i64) -> Result<AlgebraicValue> {
        let coeffs = a
            .coeffs
            .iter()
            .map(|x| checked(x.checked_mul(k)))
            .collect::<Result<_>>()?;
        Ok(AlgebraicValue { coeffs })
    }

    pub fn mul(&self, a: &AlgebraicValue, b: &AlgebraicValue) -> Result<AlgebraicValue> {
        let deg = self.degree();
        let mut prod = vec![0i64; 2 * deg - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                let t = checked(x.checked_mul(y))?;
                prod[i + j] = checked(prod[i + j].checked_add(t))?;
            }
        }
        self.reduce(&prod)
    }

    pub fn theta_pow(&self, k: u32) -> Result<AlgebraicValue> {
        let mut v = self.from_int(1);
        for _ in 0..k {
            v = self.mul_theta(&v)?;
        }
        Ok(v)
    }

    /// Real embedding Σ c_i θ^i.
    pub fn to_f64(&self, v: &AlgebraicValue) -> f64 {
        v.coeffs
            .iter()
            .zip(&self.powers)
            .map(|(&c, &p)| c as f64 * p)
            .sum()
    }

    pub fn scaled_to_f64(&self, v: &ScaledValue) -> f64 {
        self.to_f64(&v.numer) * self.theta.powi(-(v.scale as i32))
    }

    /// Sign of the real embedding, exact for zero.
    pub fn sign(&self, v: &AlgebraicValue) -> Result<Ordering> {
        if v.is_zero() {
            return Ok(Ordering::Equal);
        }
        let mut val = 0.0f64;
        let mut bound = 0.0f64;
        for (i, (&c, &p)) in v.coeffs.iter().zip(&self.powers).enumerate() {
            val += c as f64 * p;
            bound += (i as f64 + 2.0) * (c as f64).abs() * p;
        }
        bound *= 8.0 * f64::EPSILON;
        if val.abs() > bound {
            return Ok(val.partial_cmp(&0.0).unwrap());
        }
        // double-double fallback
        let mut acc = DoubleDouble::ZERO;
        let mut mag = 0.0f64;
        for (i, &c) in v.coeffs.iter().enumerate().rev() {
            acc = acc.mul(self.theta_dd).add(DoubleDouble::from_i64(c));
            mag += (i as f64 + 2.0) * (c as f64).abs() * self.powers[i];
        }
        let bound_dd = mag * 1e-29;
        let x = acc.to_f64();
        if x.abs() > bound_dd {
            Ok(x.partial_cmp(&0.0).unwrap())
        } else {
            Err(Error::SignUndetermined { bound: bound_dd })
        }
    }

    pub fn cmp(&self, a: &AlgebraicValue, b: &AlgebraicValue) -> Result<Ordering> {
        self.sign(&self.sub(a, b)?)
    }

    /// Brings a scaled value to a larger scale (multiplies the numerator by θ^k).
    pub fn rescale(&self, v: &ScaledValue, scale: u32) -> Result<ScaledValue> {
        assert!(scale >= v.scale, "rescale can only increase the scale");
        let mut numer = v.numer.clone();
        for _ in v.scale..scale {
            numer = self.mul_theta(&numer)?;
        }
        Ok(ScaledValue { numer, scale })
    }

    pub fn scaled_eq(&self, a: &ScaledValue, b: &ScaledValue) -> Result<bool> {
        let s = a.scale.max(b.scale);
        Ok(self.rescale(a, s)?.numer == self.rescale(b, s)?.numer)
    }

    pub fn scaled_cmp(&self, a: &ScaledValue, b: &ScaledValue) -> Result<Ordering> {
        let s = a.scale.max(b.scale);
        self.cmp(&self.rescale(a, s)?.numer, &self.rescale(b, s)?.numer)
    }
}

fn refine_dd(poly: &IntPolynomial, x0: f64) -> DoubleDouble {
    let mut x = DoubleDouble::from_f64(x0);
    for _ in 0..4 {
        let mut p = DoubleDouble::ZERO;
        let mut dp = DoubleDouble::ZERO;
        for &c in poly.coeffs().iter().rev() {
            dp = dp.mul(x).add(p);
            p = p.mul(x).add(DoubleDouble::from_i64(c));
        }
        if dp.hi == 0.0 {
            break;
        }
        x = x.sub(p.div(dp));
    }
    x
}
