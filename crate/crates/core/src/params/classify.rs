use serde::{Deserialize, Serialize};

use super::poly::IntPolynomial;
use super::roots::{polish_real_root, roots};
use crate::error::{Error, Result};

/// Width of the band around modulus 1 treated as undecidable.
pub const MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Pisot,
    Garsia,
    Neither,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Kind,
    /// Moduli of the roots other than the dominant one (all roots when there
    /// is no real root above one), in decreasing order.
    pub conjugate_moduli: Vec<f64>,
    pub dominant_root: Option<f64>,
    pub diagnostic: Option<String>,
}

pub fn classify(poly: &IntPolynomial) -> Result<Classification> {
    if !poly.is_monic() {
        return Err(Error::NonMonic(poly.leading()));
    }
    let rs = roots(poly)?;
    let dominant = rs
        .iter()
        .enumerate()
        .filter(|(_, z)| z.im == 0.0 && z.re > 1.0)
        .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
        .map(|(i, z)| (i, polish_real_root(poly, z.re)));

    let Some((idx, theta)) = dominant else {
        let mut moduli: Vec<f64> = rs.iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        return Ok(Classification {
            kind: Kind::NotApplicable,
            conjugate_moduli: moduli,
            dominant_root: None,
            diagnostic: Some(Error::NoRealRootAboveOne.to_string()),
        });
    };

    let mut conj: Vec<f64> = rs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != idx)
        .map(|(_, z)| z.norm())
        .collect();
    conj.sort_by(|a, b| b.total_cmp(a));

    let pisot = conj.iter().all(|&m| m < 1.0 - MODULUS_TOL);
    let garsia = poly.constant().abs() == 2 && conj.iter().all(|&m| m > 1.0 + MODULUS_TOL);
    let (kind, diagnostic) = if pisot {
        (Kind::Pisot, None)
    } else if garsia {
        (Kind::Garsia, None)
    } else {
        let near_one = conj
            .iter()
            .filter(|&&m| (m - 1.0).abs() <= MODULUS_TOL)
            .count();
        let msg = if near_one > 0 {
            format!("{near_one} conjugate modulus/moduli within {MODULUS_TOL:e} of 1")
        } else {
            "conjugates on both sides of the unit circle, or |constant term| != 2".to_string()
        };
        (Kind::Neither, Some(msg))
    };
    Ok(Classification {
        kind,
        conjugate_moduli: conj,
        dominant_root: Some(theta),
        diagnostic,
    })
}
