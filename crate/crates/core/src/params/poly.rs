use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial with integer coefficients, constant term first.
///
/// The text form is a comma-separated coefficient list in the same order,
/// e.g. `-1,-1,1` for x² − x − 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidParameter(
                "polynomial must have degree at least 1".into(),
            ));
        }
        Ok(IntPolynomial { coeffs })
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> i64 {
        *self.coeffs.last().unwrap()
    }

    pub fn constant(&self) -> i64 {
        self.coeffs[0]
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c as f64)
    }

    pub fn derivative_complex(&self, z: Complex64) -> Complex64 {
        let n = self.degree();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            acc = acc * z + (self.coeffs[k] as f64) * (k as f64);
        }
        acc
    }

    /// Integer roots of a monic polynomial (rational-root test: any rational
    /// root of a monic integer polynomial is an integer dividing the constant).
    pub fn integer_roots(&self) -> Vec<i64> {
        let c = self.constant();
        if c == 0 {
            return vec![0];
        }
        let bound = c.unsigned_abs();
        let mut roots = Vec::new();
        let mut d: u64 = 1;
        while d.saturating_mul(d) <= bound {
            if bound.is_multiple_of(d) {
                for m in [d, bound / d] {
                    for cand in [m as i64, -(m as i64)] {
                        if self.eval_exact_i128(cand) == Some(0) && !roots.contains(&cand) {
                            roots.push(cand);
                        }
                    }
                }
            }
            d += 1;
        }
        roots.sort_unstable();
        roots
    }

    fn eval_exact_i128(&self, x: i64) -> Option<i128> {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(x as i128)?.checked_add(c as i128)?;
        }
        Some(acc)
    }
}

impl TryFrom<Vec<i64>> for IntPolynomial {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        IntPolynomial::new(v)
    }
}

impl From<IntPolynomial> for Vec<i64> {
    fn from(p: IntPolynomial) -> Self {
        p.coeffs
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        IntPolynomial::new(coeffs)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: IntPolynomial = "-1, -1, 1".parse().unwrap();
        assert_eq!(p.coeffs(), &[-1, -1, 1]);
        assert_eq!(p.to_string(), "-1,-1,1");
        assert_eq!(p.degree(), 2);
        assert!(p.is_monic());
    }

    #[test]
    fn rejects_constants_and_garbage() {
        assert!("5".parse::<IntPolynomial>().is_err());
        assert!("1,x".parse::<IntPolynomial>().is_err());
        assert!("3,0,0".parse::<IntPolynomial>().is_err());
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = IntPolynomial::new(vec![-2, 0, 1, 0]).unwrap();
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn integer_roots() {
        // (x - 2)(x^2 - x - 1) = x^3 - 3x^2 + x + 2
        let p = IntPolynomial::new(vec![2, 1, -3, 1]).unwrap();
        assert_eq!(p.integer_roots(), vec![2]);
        let q: IntPolynomial = "-2,0,1".parse().unwrap();
        assert!(q.integer_roots().is_empty());
        let r: IntPolynomial = "-6,1,1".parse().unwrap(); // (x+3)(x-2)
        assert_eq!(r.integer_roots(), vec![-3, 2]);
    }
}
