//! Base-λ digit expansions x = Σ a_j λ^j: branching of valid digits, prefix
//! counting, the greedy algorithm, and the covering condition on 𝒰 that makes
//! the random support contain intervals.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::dd::DoubleDouble;
use crate::params::{AlgebraicValue, ParameterSet, ThetaRing};

/// Slack used for float comparisons against the hull.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Cap on the number of distinct residual states tracked at one depth.
pub const MAX_STATES: usize = 1 << 22;

/// A real point, kept rational when possible so exact mode can be used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Rational { p: i64, q: i64 },
    Real(f64),
}

impl Point {
    pub fn value(self) -> f64 {
        match self {
            Point::Rational { p, q } => p as f64 / q as f64,
            Point::Real(x) => x,
        }
    }

    pub fn rational(p: i64, q: i64) -> Result<Point> {
        if q == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        Ok(Point::Rational { p, q })
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Accepts `p/q`, an integer, or a decimal number.
    fn from_str(s: &str) -> Result<Point> {
        let s = s.trim();
        let bad = |e: &dyn fmt::Display| Error::Parse(format!("bad point {s:?}: {e}"));
        if let Some((a, b)) = s.split_once('/') {
            let p = a.trim().parse::<i64>().map_err(|e| bad(&e))?;
            let q = b.trim().parse::<i64>().map_err(|e| bad(&e))?;
            return Point::rational(p, q);
        }
        if let Ok(p) = s.parse::<i64>() {
            return Point::rational(p, 1);
        }
        s.parse::<f64>().map(Point::Real).map_err(|e| bad(&e))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Rational { p, q: 1 } => write!(f, "{p}"),
            Point::Rational { p, q } => write!(f, "{p}/{q}"),
            Point::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionState {
    /// (x − Σ_{j≤depth} a_j λ^j) / λ^depth.
    pub residual: f64,
    pub depth: usize,
    pub prefix: Vec<usize>,
}

impl ExpansionState {
    pub fn root(x: f64) -> Self {
        ExpansionState {
            residual: x,
            depth: 0,
            prefix: Vec::new(),
        }
    }
}

fn check_residual(r: f64, params: &ParameterSet) -> Result<()> {
    let (lo, hi) = params.hull();
    if r < lo - RESIDUAL_TOL || r > hi + RESIDUAL_TOL || r.is_nan() {
        return Err(Error::ResidualOutOfRange {
            residual: r,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Digit indices d for which (r − d·λ)/λ stays in the hull.
pub fn children(state: &ExpansionState, params: &ParameterSet) -> Result<Vec<usize>> {
    check_residual(state.residual, params)?;
    let lam = params.lambda();
    let (lo, hi) = params.hull();
    Ok(params
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, d)| {
            let r = state.residual - d.value * lam;
            r >= lam * lo - RESIDUAL_TOL && r <= lam * hi + RESIDUAL_TOL
        })
        .map(|(i, _)| i)
        .collect())
}

pub fn child(state: &ExpansionState, params: &ParameterSet, digit: usize) -> ExpansionState {
    let lam = params.lambda();
    let mut prefix = state.prefix.clone();
    prefix.push(digit);
    ExpansionState {
        residual: (state.residual - params.digits()[digit].value * lam) / lam,
        depth: state.depth + 1,
        prefix,
    }
}

/// Exact residuals: for x = p/q the scaled residual R_k = q·θ^k·(x − Σ_{j≤k} a_j λ^j)
/// lies in ℤ[θ] and obeys R_{k+1} = θR_k − q·a_{k+1}.
struct ExactResiduals<'a> {
    ring: &'a ThetaRing,
    digits: &'a [i64],
    q: i64,
    dmin: i64,
    dmax: i64,
}

impl ExactResiduals<'_> {
    /// r = R/q lies in [dmin, dmax]/(θ−1), i.e. (θ−1)R − q·d is ≥ 0 resp. ≤ 0.
    fn in_hull(&self, r: &AlgebraicValue) -> Result<bool> {
        let ring = self.ring;
        let shifted = ring.sub(&ring.mul_theta(r)?, r)?;
        let lo = ring.sub(
            &shifted,
            &ring.from_int(self.q.checked_mul(self.dmin).ok_or(Error::DegreeOverflow)?),
        )?;
        let hi = ring.sub(
            &shifted,
            &ring.from_int(self.q.checked_mul(self.dmax).ok_or(Error::DegreeOverflow)?),
        )?;
        Ok(ring.sign(&lo)? != Ordering::Less && ring.sign(&hi)? != Ordering::Greater)
    }

    fn step(&self, r: &AlgebraicValue, digit: usize) -> Result<AlgebraicValue> {
        let qa = self
            .q
            .checked_mul(self.digits[digit])
            .ok_or(Error::DegreeOverflow)?;
        self.ring.shift_add(r, -qa)
    }
}

fn exact_residuals<'a>(params: &'a ParameterSet, q: i64) -> Result<ExactResiduals<'a>> {
    let (ring, digits) = params.exact()?;
    Ok(ExactResiduals {
        ring,
        digits,
        q,
        dmin: *digits.iter().min().unwrap(),
        dmax: *digits.iter().max().unwrap(),
    })
}

fn state_guard(count: usize) -> Result<()> {
    if count > MAX_STATES {
        return Err(Error::StateLimit {
            what: "distinct residual states",
            count,
            limit: MAX_STATES,
        });
    }
    Ok(())
}

/// Number of digit prefixes of length `depth` that can still be extended to
/// an expansion of x. Rational x with a minimal polynomial runs in ℤ[θ];
/// otherwise residuals are merged after rounding to 1e-12.
pub fn count_prefixes(x: Point, params: &ParameterSet, depth: usize) -> Result<u128> {
    check_residual(x.value(), params)?;
    if let (Point::Rational { p, q }, true) = (x, params.has_exact()) {
        let ex = exact_residuals(params, q)?;
        let mut cur: HashMap<AlgebraicValue, u128> = HashMap::from([(ex.ring.from_int(p), 1)]);
        for _ in 0..depth {
            let mut next: HashMap<AlgebraicValue, u128> = HashMap::new();
            for (r, c) in &cur {
                for d in 0..ex.digits.len() {
                    let nr = ex.step(r, d)?;
                    if ex.in_hull(&nr)? {
                        *next.entry(nr).or_insert(0) += c;
                    }
                }
            }
            state_guard(next.len())?;
            cur = next;
        }
        return Ok(cur.values().sum());
    }
    let lam = params.lambda();
    let (lo, hi) = params.hull();
    let key = |r: f64| (r * 1e12).round() as i64;
    let mut cur: HashMap<i64, (f64, u128)> = HashMap::from([(key(x.value()), (x.value(), 1))]);
    for _ in 0..depth {
        let mut next: HashMap<i64, (f64, u128)> = HashMap::new();
        for &(r, c) in cur.values() {
            for d in params.digits() {
                let nr = (r - d.value * lam) / lam;
                if nr >= lo - RESIDUAL_TOL && nr <= hi + RESIDUAL_TOL {
                    next.entry(key(nr)).or_insert((nr, 0)).1 += c;
                }
            }
        }
        state_guard(next.len())?;
        cur = next;
    }
    Ok(cur.values().map(|v| v.1).sum())
}

/// All valid prefixes of length `depth` (float mode), at most `limit` of them.
pub fn enumerate_prefixes(
    x: f64,
    params: &ParameterSet,
    depth: usize,
    limit: usize,
) -> Result<Vec<ExpansionState>> {
    let mut level = vec![ExpansionState::root(x)];
    check_residual(x, params)?;
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &level {
            for d in children(s, params)? {
                next.push(child(s, params, d));
            }
        }
        if next.len() > limit {
            return Err(Error::StateLimit {
                what: "enumerated prefixes",
                count: next.len(),
                limit,
            });
        }
        level = next;
    }
    Ok(level)
}

fn require_binary(params: &ParameterSet) -> Result<()> {
    if !params.is_binary_01() {
        return Err(Error::DigitSetUnsupported(
            "only the digit set {0, 1} is supported here".into(),
        ));
    }
    Ok(())
}

/// Digit values 0/1 of the greedy expansion: each digit is 1 exactly when
/// adding λ^n keeps the partial sum at most x.
pub fn greedy(x: Point, params: &ParameterSet, depth: usize) -> Result<Vec<u8>> {
    require_binary(params)?;
    check_residual(x.value(), params)?;
    let digits = if let (Point::Rational { p, q }, true) = (x, params.has_exact()) {
        greedy_exact(p, q, params, depth)?
    } else {
        greedy_dd(x.value(), params.lambda(), depth)
    };
    // greedy can only fail for λ < ½ where the hull has holes
    let rem = greedy_remainder(x.value(), params.lambda(), &digits);
    let lam_n = params.lambda().powi(depth as i32);
    if rem < -RESIDUAL_TOL * lam_n || rem > lam_n * params.hull().1 * (1.0 + 1e-9) {
        return Err(Error::ResidualOutOfRange {
            residual: rem / lam_n,
            lo: 0.0,
            hi: params.hull().1,
        });
    }
    Ok(digits)
}

fn greedy_dd(x: f64, lam: f64, depth: usize) -> Vec<u8> {
    let lam_dd = DoubleDouble::from_f64(lam);
    let mut pow = DoubleDouble::from_f64(1.0);
    let mut rem = DoubleDouble::from_f64(x);
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        pow = pow.mul(lam_dd);
        let after = rem.sub(pow);
        if after.hi > 0.0 || (after.hi == 0.0 && after.lo >= 0.0) {
            rem = after;
            out.push(1);
        } else {
            out.push(0);
        }
    }
    out
}

fn greedy_exact(p: i64, q: i64, params: &ParameterSet, depth: usize) -> Result<Vec<u8>> {
    let ex = exact_residuals(params, q)?;
    let one = ex.digits.iter().position(|&d| d == 1).unwrap();
    let mut r = ex.ring.from_int(p);
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        // digit 1 iff θ·r − 1 ≥ 0 (scaled by q)
        let nr = ex.step(&r, one)?;
        if ex.ring.sign(&nr)? != Ordering::Less {
            r = nr;
            out.push(1);
        } else {
            r = ex.ring.mul_theta(&r)?;
            out.push(0);
        }
    }
    Ok(out)
}

/// x − Σ d_j λ^j evaluated in double-double.
pub fn greedy_remainder(x: f64, lam: f64, digits: &[u8]) -> f64 {
    let lam_dd = DoubleDouble::from_f64(lam);
    let mut pow = DoubleDouble::from_f64(1.0);
    let mut rem = DoubleDouble::from_f64(x);
    for &d in digits {
        pow = pow.mul(lam_dd);
        if d == 1 {
            rem = rem.sub(pow);
        }
    }
    rem.to_f64()
}

/// Values within this relative distance of g = (√5−1)/2 are treated as g.
const GOLDEN_TOL: f64 = 1e-14;

/// Smallest L ≥ 3 with λ² + … + λ^L > 1; `None` when λ ≤ g.
pub fn eq_star_depth(lambda: f64) -> Option<usize> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    if lambda <= g * (1.0 + GOLDEN_TOL) || !(lambda < 1.0) {
        return None;
    }
    let mut sum = lambda * lambda;
    let mut pow = lambda * lambda;
    let mut l = 2;
    while sum <= 1.0 || l < 3 {
        pow *= lambda;
        sum += pow;
        l += 1;
    }
    Some(l)
}

/// The interval 𝒰 = (α, β) with α = λ^L/(1−λ^L), β = λ/(1−λ) − α.
pub fn u_interval(lambda: f64, l: usize) -> (f64, f64) {
    let ll = lambda.powi(l as i32);
    let alpha = ll / (1.0 - ll);
    (alpha, lambda / (1.0 - lambda) - alpha)
}

/// 𝒰_{a} for every word a of length L ending in `last`, sorted by left end.
pub fn u_family(lambda: f64, l: usize, last: u8) -> Vec<(f64, f64)> {
    let (alpha, beta) = u_interval(lambda, l);
    let ll = lambda.powi(l as i32);
    let mut out: Vec<(f64, f64)> = (0..1u64 << (l - 1))
        .map(|bits| {
            // bits gives a_1 … a_{L−1}, most significant first
            let mut xi = 0.0;
            for j in 1..l {
                if bits >> (l - 1 - j) & 1 == 1 {
                    xi += lambda.powi(j as i32);
                }
            }
            xi += last as f64 * ll;
            (xi + ll * alpha, xi + ll * beta)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCover {
    /// Smallest overlap between consecutive intervals of the chain that
    /// covers 𝒰; every subinterval of 𝒰 this short lies in one member.
    pub overlap: f64,
    pub gaps: Vec<(f64, f64)>,
}

/// Walks a sorted family and measures how it covers (α, β).
pub fn cover_family(family: &[(f64, f64)], alpha: f64, beta: f64) -> FamilyCover {
    let mut gaps = Vec::new();
    let mut overlap = beta - alpha;
    let mut reach = f64::NEG_INFINITY;
    let mut started = false;
    for &(l, r) in family {
        if r <= alpha {
            continue;
        }
        if !started {
            if l > alpha + RESIDUAL_TOL {
                gaps.push((alpha, l.min(beta)));
            }
            started = true;
            reach = r;
            continue;
        }
        if l >= beta {
            break;
        }
        if l > reach {
            gaps.push((reach, l));
        } else {
            overlap = overlap.min(reach - l);
        }
        reach = reach.max(r);
    }
    if !started {
        gaps.push((alpha, beta));
    } else if reach < beta - RESIDUAL_TOL {
        gaps.push((reach, beta));
    }
    FamilyCover { overlap, gaps }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub alpha: f64,
    pub beta: f64,
    pub margin: f64,
    pub witness_gaps: Vec<(f64, f64)>,
    pub success: bool,
}

/// Checks 𝒰 ⊂ (∪_a 𝒰_{a0}) ∩ (∪_a 𝒰_{a1}) over words a of length L−1.
pub fn cover_check(params: &ParameterSet, l: usize) -> Result<CoverReport> {
    require_binary(params)?;
    if !(2..=30).contains(&l) {
        return Err(Error::InvalidParameter(format!(
            "cover depth L must be in 2..=30, got {l}"
        )));
    }
    let lam = params.lambda();
    let (alpha, beta) = u_interval(lam, l);
    let mut margin = f64::INFINITY;
    let mut gaps = Vec::new();
    if !(alpha < beta) {
        gaps.push((alpha, beta));
        margin = 0.0;
    } else {
        for last in [0u8, 1] {
            let fc = cover_family(&u_family(lam, l, last), alpha, beta);
            margin = margin.min(fc.overlap);
            gaps.extend(fc.gaps);
        }
    }
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let success = gaps.is_empty() && margin > 0.0;
    Ok(CoverReport {
        lambda: lam,
        l,
        alpha,
        beta,
        margin,
        witness_gaps: gaps,
        success,
    })
}

/// Length c such that every J ⊂ 𝒰 with |J| ≤ c sits inside a single 𝒰_{a0}
/// and a single 𝒰_{a'1}, capped strictly below λ^L|𝒰|/4.
pub fn lemma31_constant(params: &ParameterSet, l: usize) -> Result<f64> {
    let rep = cover_check(params, l)?;
    if !rep.success {
        return Err(Error::CoverFailed(l));
    }
    let cap = params.lambda().powi(l as i32) * (rep.beta - rep.alpha) / 4.0;
    Ok(rep.margin.min(cap * (1.0 - 1e-9)))
}
