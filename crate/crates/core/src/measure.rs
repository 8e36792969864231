//! Finite atomic measures: the empirical leaf measure μ_n of one labeled tree
//! and the deterministic self-similar approximant ν_n; histograms and
//! total-variation distance on a common grid.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AlgebraicValue, ParameterSet};
use crate::tree::{
    leaf_values, leaf_values_exact, replica_seed, LabelOracle, LabelSource, LeafMode,
};

/// Largest atom count ν_n may reach.
pub const MAX_ATOMS: usize = 1 << 26;

/// Sorted (position, weight) pairs with distinct positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAtoms {
    atoms: Vec<(f64, f64)>,
}

impl WeightedAtoms {
    pub fn dirac(x: f64) -> Self {
        WeightedAtoms {
            atoms: vec![(x, 1.0)],
        }
    }

    /// Sorts and merges positions closer than `tol`.
    pub fn from_unsorted(mut atoms: Vec<(f64, f64)>, tol: f64) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        let mut last = f64::NEG_INFINITY;
        for (x, w) in atoms {
            match out.last_mut() {
                Some(a) if x - last <= tol => a.1 += w,
                _ => out.push((x, w)),
            }
            last = x;
        }
        WeightedAtoms { atoms: out }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn support_bounds(&self) -> Option<(f64, f64)> {
        Some((self.atoms.first()?.0, self.atoms.last()?.0))
    }
}

fn merge_tol(params: &ParameterSet, n: usize) -> f64 {
    1e-12 * params.lambda().powi(n as i32)
}

/// Collapses exact keys, keeping the f64 embedding of each.
fn from_exact(
    params: &ParameterSet,
    n: usize,
    keyed: HashMap<AlgebraicValue, f64>,
) -> Result<WeightedAtoms> {
    let (ring, _) = params.exact()?;
    let scale = params.lambda().powi(n as i32);
    let atoms = keyed
        .into_iter()
        .map(|(k, w)| (ring.to_f64(&k) * scale, w))
        .collect();
    // distinct exact values at one scale are far apart, so no float merging
    Ok(WeightedAtoms::from_unsorted(atoms, -1.0))
}

/// μ_n = ℓ^(−n) Σ_{|v|=n} δ_{f(v)} for one labeled tree.
pub fn mu_n(src: &dyn LabelSource, n: usize) -> Result<WeightedAtoms> {
    let p = src.params();
    let w = (p.arity() as f64).powi(-(n as i32));
    if p.has_exact() && n <= crate::params::MAX_EXACT_DEPTH {
        let mut counts: HashMap<AlgebraicValue, f64> = HashMap::new();
        for a in leaf_values_exact(src, n)? {
            *counts.entry(a).or_insert(0.0) += w;
        }
        return from_exact(p, n, counts);
    }
    let vals = leaf_values(src, n, LeafMode::Full)?;
    Ok(WeightedAtoms::from_unsorted(
        vals.into_iter().map(|x| (x, w)).collect(),
        merge_tol(p, n),
    ))
}

/// ν_n: law of Σ_{j≤n} d_j λ^j with i.i.d. η digits, built by convolving one
/// level at a time and merging coincident atoms.
pub fn nu_n(params: &ParameterSet, n: usize) -> Result<WeightedAtoms> {
    let digits = params.digits();
    if params.has_exact() && n <= crate::params::MAX_EXACT_DEPTH {
        let (ring, ints) = params.exact()?;
        let mut cur: HashMap<AlgebraicValue, f64> = HashMap::from([(ring.zero(), 1.0)]);
        for level in 1..=n {
            let mut next: HashMap<AlgebraicValue, f64> = HashMap::with_capacity(cur.len() * 2);
            for (k, w) in &cur {
                for (d, &di) in digits.iter().zip(ints) {
                    *next.entry(ring.shift_add(k, di)?).or_insert(0.0) += w * d.prob;
                }
            }
            guard_atoms(level, next.len())?;
            cur = next;
        }
        return from_exact(params, n, cur);
    }
    let mut cur = WeightedAtoms::dirac(0.0);
    for level in 1..=n {
        let step = params.lambda().powi(level as i32);
        guard_atoms(level, cur.len() * digits.len())?;
        let atoms = cur
            .atoms
            .iter()
            .flat_map(|&(x, w)| digits.iter().map(move |d| (x + d.value * step, w * d.prob)))
            .collect();
        cur = WeightedAtoms::from_unsorted(atoms, merge_tol(params, level));
    }
    Ok(cur)
}

fn guard_atoms(level: usize, count: usize) -> Result<()> {
    if count > MAX_ATOMS {
        return Err(Error::DepthTooLarge {
            depth: level,
            what: "number of atoms",
            count: count as f64,
            limit: MAX_ATOMS as f64,
        });
    }
    Ok(())
}

/// One application of x ↦ Σ_d p_d δ_{λ(x+d)}.
pub fn refine(atoms: &WeightedAtoms, params: &ParameterSet, tol: f64) -> WeightedAtoms {
    let lam = params.lambda();
    let out = atoms
        .atoms
        .iter()
        .flat_map(|&(x, w)| {
            params
                .digits()
                .iter()
                .map(move |d| (lam * (x + d.value), w * d.prob))
        })
        .collect();
    WeightedAtoms::from_unsorted(out, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Values below `lo` (counted in the first bin).
    pub below: u64,
    /// Values above `hi` (counted in the last bin).
    pub above: u64,
}

fn check_range(lo: f64, hi: f64, bins: usize) -> Result<()> {
    if !(lo < hi) || bins == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateRange { lo, hi, bins });
    }
    Ok(())
}

/// Bin of x for half-open bins [e_i, e_{i+1}), the last one closed;
/// out-of-range values go to the nearest edge bin.
#[inline]
fn bin_index(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if !(x > lo) {
        return 0;
    }
    let i = ((x - lo) / (hi - lo) * bins as f64).floor();
    if i >= bins as f64 {
        bins - 1
    } else {
        i as usize
    }
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        let hi = if i + 1 == self.counts.len() {
            self.hi
        } else {
            self.lo + (i + 1) as f64 * w
        };
        (self.lo + i as f64 * w, hi)
    }
}

pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    check_range(lo, hi, bins)?;
    let (counts, below, above) = values
        .par_chunks(1 << 16)
        .map(|chunk| {
            let mut c = vec![0u64; bins];
            let (mut b, mut a) = (0u64, 0u64);
            for &x in chunk {
                b += (x < lo) as u64;
                a += (x > hi) as u64;
                c[bin_index(x, lo, hi, bins)] += 1;
            }
            (c, b, a)
        })
        .reduce(
            || (vec![0u64; bins], 0, 0),
            |(mut c1, b1, a1), (c2, b2, a2)| {
                c1.iter_mut().zip(c2).for_each(|(x, y)| *x += y);
                (c1, b1 + b2, a1 + a2)
            },
        );
    Ok(Histogram {
        lo,
        hi,
        counts,
        total: values.len() as u64,
        below,
        above,
    })
}

/// Mass of each bin of a uniform grid.
pub fn bin_atoms(a: &WeightedAtoms, lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
    check_range(lo, hi, bins)?;
    let mut out = vec![0.0; bins];
    for &(x, w) in &a.atoms {
        out[bin_index(x, lo, hi, bins)] += w;
    }
    Ok(out)
}

/// ½ Σ |a_i − b_i| over two binned mass vectors.
pub fn tv_binned(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn tv_distance(
    a: &WeightedAtoms,
    b: &WeightedAtoms,
    lo: f64,
    hi: f64,
    bins: usize,
) -> Result<f64> {
    Ok(tv_binned(
        &bin_atoms(a, lo, hi, bins)?,
        &bin_atoms(b, lo, hi, bins)?,
    ))
}

/// Seed-average of binned μ_n over `reps` independent labelings.
pub fn mean_binned_mu(
    params: &ParameterSet,
    n: usize,
    reps: usize,
    seed: u64,
    lo: f64,
    hi: f64,
    bins: usize,
) -> Result<Vec<f64>> {
    check_range(lo, hi, bins)?;
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    let w = (params.arity() as f64).powi(-(n as i32)) / reps as f64;
    let per: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            let o = LabelOracle::new(replica_seed(seed, k), params.clone());
            let mut m = vec![0.0; bins];
            for x in leaf_values(&o, n, LeafMode::Full)? {
                m[bin_index(x, lo, hi, bins)] += w;
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    // fixed-order reduction keeps the sum independent of thread count
    let mut out = vec![0.0; bins];
    for m in per {
        out.iter_mut().zip(m).for_each(|(x, y)| *x += y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::uniform_digits;

    #[test]
    fn depth_zero() {
        let p = ParameterSet::bernoulli(0.7).unwrap();
        let o = LabelOracle::new(1, p.clone());
        assert_eq!(mu_n(&o, 0).unwrap(), WeightedAtoms::dirac(0.0));
        assert_eq!(nu_n(&p, 0).unwrap(), WeightedAtoms::dirac(0.0));
    }

    #[test]
    fn mu_one_has_expected_shape() {
        let p = ParameterSet::bernoulli(0.7).unwrap();
        for s in 0..20 {
            let m = mu_n(&LabelOracle::new(s, p.clone()), 1).unwrap();
            assert!((m.total_weight() - 1.0).abs() < 1e-15);
            for &(x, w) in m.atoms() {
                assert!(x == 0.0 || x == 0.7);
                assert!(w == 0.5 || w == 1.0);
            }
        }
    }

    #[test]
    fn nu_two_at_golden() {
        let p = ParameterSet::bernoulli_exact("-1,-1,1".parse().unwrap()).unwrap();
        let nu = nu_n(&p, 2).unwrap();
        let g = p.lambda();
        let expect = [0.0, g * g, g, 1.0];
        assert_eq!(nu.len(), 4);
        for (a, e) in nu.atoms().iter().zip(expect) {
            assert!((a.0 - e).abs() < 1e-15);
            assert_eq!(a.1, 0.25);
        }
        // three levels: .011 = .100 collides exactly
        assert_eq!(nu_n(&p, 3).unwrap().len(), 7);
    }

    #[test]
    fn nu_refinement_identity() {
        let p = ParameterSet::bernoulli(0.7).unwrap();
        let a = nu_n(&p, 10).unwrap();
        let b = refine(&nu_n(&p, 9).unwrap(), &p, 1e-12);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn nu_general_digits_in_hull() {
        let p = ParameterSet::new(0.45, 3, uniform_digits(&[-1.0, 0.5, 2.0])).unwrap();
        let nu = nu_n(&p, 7).unwrap();
        let (lo, hi) = p.hull();
        let (a, b) = nu.support_bounds().unwrap();
        assert!(a >= lo && b <= hi);
        assert!((nu.total_weight() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![0; 4]);
        let h = histogram(&[0.0, 1.0, 0.25, -3.0, 7.0], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![2, 1, 0, 2]);
        assert_eq!((h.below, h.above, h.total), (1, 1, 5));
        assert!(histogram(&[0.5], 1.0, 1.0, 3).is_err());
        assert!(histogram(&[0.5], 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn tv_extremes() {
        let a = WeightedAtoms::dirac(0.1);
        let b = WeightedAtoms::dirac(0.9);
        assert_eq!(tv_distance(&a, &a, 0.0, 1.0, 16).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &b, 0.0, 1.0, 16).unwrap(), 1.0);
    }
}
