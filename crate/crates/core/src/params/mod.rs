//! Model parameters, algebraic classification of θ = 1/λ, and exact digit sums.

mod algebraic;
mod classify;
pub(crate) mod dd;
mod poly;
mod roots;

pub use algebraic::{AlgebraicValue, ScaledValue, ThetaRing};
pub use classify::{classify, Classification, Kind, MODULUS_TOL};
pub use poly::IntPolynomial;
pub use roots::roots;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest digit string accepted by exact mode; coefficients of θ^n grow
/// geometrically and must stay inside `i64`.
pub const MAX_EXACT_DEPTH: usize = 64;

const PROB_TOL: f64 = 1e-12;
const MIN_POLY_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Digit {
    pub value: f64,
    pub prob: f64,
}

/// Step ratio λ, tree arity ℓ, digit law η = Σ p_d δ_d, and optionally the
/// minimal polynomial of θ = 1/λ.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawParameterSet", into = "RawParameterSet")]
pub struct ParameterSet {
    lambda: f64,
    arity: usize,
    digits: Vec<Digit>,
    min_poly: Option<IntPolynomial>,
    ring: Option<ThetaRing>,
    exact_digits: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawParameterSet {
    #[serde(default)]
    lambda: Option<f64>,
    arity: usize,
    digits: Vec<Digit>,
    #[serde(default)]
    min_poly: Option<IntPolynomial>,
}

impl TryFrom<RawParameterSet> for ParameterSet {
    type Error = Error;

    fn try_from(raw: RawParameterSet) -> Result<Self> {
        match (raw.lambda, raw.min_poly) {
            (_, Some(p)) => ParameterSet::from_min_poly(p, raw.arity, raw.digits),
            (Some(l), None) => ParameterSet::new(l, raw.arity, raw.digits),
            (None, None) => Err(Error::InvalidParameter(
                "one of lambda or min_poly is required".into(),
            )),
        }
    }
}

impl From<ParameterSet> for RawParameterSet {
    fn from(p: ParameterSet) -> Self {
        RawParameterSet {
            lambda: Some(p.lambda),
            arity: p.arity,
            digits: p.digits,
            min_poly: p.min_poly,
        }
    }
}

/// Uniform law on the given digit values.
pub fn uniform_digits(values: &[f64]) -> Vec<Digit> {
    let p = 1.0 / values.len() as f64;
    values
        .iter()
        .map(|&value| Digit { value, prob: p })
        .collect()
}

fn validate_digits(digits: &[Digit]) -> Result<()> {
    if digits.is_empty() {
        return Err(Error::InvalidParameter("digit set is empty".into()));
    }
    if digits
        .iter()
        .any(|d| !(d.prob > 0.0) || !d.value.is_finite())
    {
        return Err(Error::InvalidParameter(
            "digit probabilities must be positive and values finite".into(),
        ));
    }
    let total: f64 = digits.iter().map(|d| d.prob).sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidParameter(format!(
            "digit probabilities sum to {total}, not 1"
        )));
    }
    for (i, a) in digits.iter().enumerate() {
        if digits[i + 1..].iter().any(|b| b.value == a.value) {
            return Err(Error::InvalidParameter(format!(
                "digit value {} repeated",
                a.value
            )));
        }
    }
    Ok(())
}

fn integer_digits(digits: &[Digit]) -> Option<Vec<i64>> {
    digits
        .iter()
        .map(|d| {
            let r = d.value.round();
            (r == d.value && r.abs() < 1e15).then_some(r as i64)
        })
        .collect()
}

impl ParameterSet {
    pub fn new(lambda: f64, arity: usize, digits: Vec<Digit>) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 1), got {lambda}"
            )));
        }
        if arity < 2 {
            return Err(Error::InvalidParameter(format!(
                "arity must be at least 2, got {arity}"
            )));
        }
        validate_digits(&digits)?;
        Ok(ParameterSet {
            lambda,
            arity,
            digits,
            min_poly: None,
            ring: None,
            exact_digits: None,
        })
    }

    /// λ is taken as the reciprocal of the largest real root θ > 1 of `poly`.
    ///
    /// Irreducibility is not verified beyond the rational-root test: a
    /// polynomial with an integer root is rejected, anything else is trusted
    /// to be the minimal polynomial of θ.
    pub fn from_min_poly(poly: IntPolynomial, arity: usize, digits: Vec<Digit>) -> Result<Self> {
        if !poly.is_monic() {
            return Err(Error::NonMonic(poly.leading()));
        }
        if let Some(&r) = poly.integer_roots().first() {
            return Err(Error::Reducible(r));
        }
        let theta = dominant_real_root(&poly)?;
        let lambda = 1.0 / theta;
        if poly.eval(1.0 / lambda).abs() >= MIN_POLY_RESIDUAL_TOL {
            return Err(Error::InvalidParameter(format!(
                "|p(1/lambda)| = {} is not below {MIN_POLY_RESIDUAL_TOL}",
                poly.eval(1.0 / lambda).abs()
            )));
        }
        let mut p = ParameterSet::new(lambda, arity, digits)?;
        let ring = ThetaRing::new(poly.clone(), theta)?;
        p.lambda = 1.0 / ring.theta();
        p.exact_digits = integer_digits(&p.digits);
        p.min_poly = Some(poly);
        p.ring = Some(ring);
        Ok(p)
    }

    /// Binary tree with the uniform digits {0, 1}.
    pub fn bernoulli(lambda: f64) -> Result<Self> {
        ParameterSet::new(lambda, 2, uniform_digits(&[0.0, 1.0]))
    }

    pub fn bernoulli_exact(poly: IntPolynomial) -> Result<Self> {
        ParameterSet::from_min_poly(poly, 2, uniform_digits(&[0.0, 1.0]))
    }

    pub fn with_arity(mut self, arity: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidParameter(format!(
                "arity must be at least 2, got {arity}"
            )));
        }
        self.arity = arity;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        match &self.ring {
            Some(r) => r.theta(),
            None => 1.0 / self.lambda,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    pub fn digit_values(&self) -> Vec<f64> {
        self.digits.iter().map(|d| d.value).collect()
    }

    pub fn min_poly(&self) -> Option<&IntPolynomial> {
        self.min_poly.as_ref()
    }

    pub fn max_abs_digit(&self) -> f64 {
        self.digits.iter().fold(0.0, |m, d| m.max(d.value.abs()))
    }

    pub fn min_digit(&self) -> f64 {
        self.digits
            .iter()
            .fold(f64::INFINITY, |m, d| m.min(d.value))
    }

    pub fn max_digit(&self) -> f64 {
        self.digits
            .iter()
            .fold(f64::NEG_INFINITY, |m, d| m.max(d.value))
    }

    /// The attractor hull [min_d · λ/(1−λ), max_d · λ/(1−λ)]; for digits
    /// {0, 1} this is I = [0, λ/(1−λ)].
    pub fn hull(&self) -> (f64, f64) {
        let h = self.lambda / (1.0 - self.lambda);
        (self.min_digit() * h, self.max_digit() * h)
    }

    /// True when the digit set is exactly {0, 1}.
    pub fn is_binary_01(&self) -> bool {
        let mut v = self.digit_values();
        v.sort_by(f64::total_cmp);
        v == [0.0, 1.0]
    }

    pub fn has_exact(&self) -> bool {
        self.ring.is_some() && self.exact_digits.is_some()
    }

    /// Ring context and integer digit values for exact mode.
    pub fn exact(&self) -> Result<(&ThetaRing, &[i64])> {
        match (&self.ring, &self.exact_digits) {
            (Some(r), Some(d)) => Ok((r, d)),
            (None, _) => Err(Error::ExactModeUnavailable(
                "no minimal polynomial supplied".into(),
            )),
            (Some(_), None) => Err(Error::ExactModeUnavailable(
                "digit values are not all integers".into(),
            )),
        }
    }

    /// Index of the digit drawn from a uniform variate u ∈ [0, 1).
    #[inline]
    pub fn digit_for_uniform(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, d) in self.digits.iter().enumerate() {
            acc += d.prob;
            if u < acc {
                return i;
            }
        }
        self.digits.len() - 1
    }
}

fn dominant_real_root(poly: &IntPolynomial) -> Result<f64> {
    let rs = roots(poly)?;
    let best = rs
        .iter()
        .filter(|z| z.im == 0.0 && z.re > 1.0)
        .map(|z| z.re)
        .fold(f64::NAN, f64::max);
    if best.is_nan() {
        return Err(Error::NoRealRootAboveOne);
    }
    Ok(roots::polish_real_root(poly, best))
}

/// Σ_{j=1}^{n} d_j λ^j in exact or floating form.
#[derive(Debug, Clone, PartialEq)]
pub enum DigitSum {
    Exact(ScaledValue),
    Float(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

/// Digit sum of a sequence of digit indices. Exact mode returns θ^(−n)·P(θ)
/// with P = Σ_j d_j θ^(n−j) reduced modulo the minimal polynomial.
pub fn digit_sum_value(indices: &[usize], params: &ParameterSet, mode: Mode) -> Result<DigitSum> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= params.digits.len()) {
        return Err(Error::InvalidParameter(format!(
            "digit index {bad} out of range"
        )));
    }
    match mode {
        Mode::Float => {
            // Horner from the deepest digit outward
            let lam = params.lambda;
            let v = indices
                .iter()
                .rev()
                .fold(0.0, |acc, &i| (acc + params.digits[i].value) * lam);
            Ok(DigitSum::Float(v))
        }
        Mode::Exact => {
            if indices.len() > MAX_EXACT_DEPTH {
                return Err(Error::DepthTooLarge {
                    depth: indices.len(),
                    what: "exact digit string length",
                    count: indices.len() as f64,
                    limit: MAX_EXACT_DEPTH as f64,
                });
            }
            let (ring, values) = params.exact()?;
            let mut numer = ring.zero();
            for &i in indices {
                numer = ring.shift_add(&numer, values[i])?;
            }
            Ok(DigitSum::Exact(ScaledValue {
                numer,
                scale: indices.len() as u32,
            }))
        }
    }
}
