//! Random labels on the ℓ-ary tree, leaf values f(v), distinct prefix words,
//! and the critical Galton–Watson clusters of 1-labels.
//!
//! Labels come from a counter-based hash of (seed, depth, index), so any
//! vertex can be queried in any order, from any thread, and the same vertex
//! always carries the same digit.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AlgebraicValue, ParameterSet, MAX_EXACT_DEPTH};

/// Largest number of leaves enumerated in full mode.
pub const MAX_FULL_LEAVES: u64 = 1 << 26;

/// A vertex addressed by its depth and the base-ℓ integer of its branch
/// sequence (first branch most significant, branches numbered from 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexPath {
    pub depth: u32,
    pub index: u128,
}

impl VertexPath {
    pub const ROOT: VertexPath = VertexPath { depth: 0, index: 0 };

    /// Deepest level whose indices fit in a `u128` for this arity.
    pub fn max_depth(arity: usize) -> u32 {
        (127.0 / (arity as f64).log2()).floor() as u32
    }

    #[inline]
    pub fn child(self, arity: usize, branch: usize) -> VertexPath {
        VertexPath {
            depth: self.depth + 1,
            index: self.index * arity as u128 + branch as u128,
        }
    }

    pub fn parent(self, arity: usize) -> Option<VertexPath> {
        (self.depth > 0).then(|| VertexPath {
            depth: self.depth - 1,
            index: self.index / arity as u128,
        })
    }

    /// Ancestor at the given depth (the vertex itself when `depth == self.depth`).
    pub fn ancestor(self, arity: usize, depth: u32) -> VertexPath {
        assert!(depth <= self.depth);
        VertexPath {
            depth,
            index: self.index / (arity as u128).pow(self.depth - depth),
        }
    }

    /// Branch indices from the root, each in 0..arity.
    pub fn branches(self, arity: usize) -> Vec<usize> {
        let mut out = vec![0; self.depth as usize];
        let mut idx = self.index;
        for slot in out.iter_mut().rev() {
            *slot = (idx % arity as u128) as usize;
            idx /= arity as u128;
        }
        out
    }
}

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `k`-th independent replica derived from a base seed.
pub fn replica_seed(seed: u64, k: u64) -> u64 {
    mix64(mix64(seed) ^ k.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Anything that assigns a digit index to each tree vertex.
pub trait LabelSource: Sync {
    fn params(&self) -> &ParameterSet;
    fn label(&self, v: VertexPath) -> usize;
}

/// The seeded "lottery": an i.i.d. η-distributed digit for every vertex.
#[derive(Debug, Clone)]
pub struct LabelOracle {
    seed: u64,
    params: ParameterSet,
}

impl LabelOracle {
    pub fn new(seed: u64, params: ParameterSet) -> Self {
        LabelOracle { seed, params }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn uniform(&self, v: VertexPath) -> f64 {
        let mut h = mix64(self.seed ^ mix64(v.depth as u64));
        h = mix64(h ^ v.index as u64);
        h = mix64(h ^ (v.index >> 64) as u64);
        (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl LabelSource for LabelOracle {
    fn params(&self) -> &ParameterSet {
        &self.params
    }

    #[inline]
    fn label(&self, v: VertexPath) -> usize {
        if v.depth == 0 {
            // the root carries no step
            return 0;
        }
        self.params.digit_for_uniform(self.uniform(v))
    }
}

fn check_depth(n: usize, arity: usize) -> Result<()> {
    let max = VertexPath::max_depth(arity) as usize;
    if n > max {
        return Err(Error::DepthTooLarge {
            depth: n,
            what: "vertex index",
            count: (arity as f64).powi(n as i32),
            limit: 2f64.powi(127),
        });
    }
    Ok(())
}

fn check_full(n: usize, arity: usize) -> Result<()> {
    let count = (arity as f64).powi(n as i32);
    if count > MAX_FULL_LEAVES as f64 {
        return Err(Error::DepthTooLarge {
            depth: n,
            what: "number of leaves",
            count,
            limit: MAX_FULL_LEAVES as f64,
        });
    }
    Ok(())
}

/// Runs `step` along every root-to-leaf path and returns the leaf states in
/// depth-first (lexicographic) order. Subtrees below a fixed split level are
/// filled in parallel.
pub fn expand_leaves<T, F>(src: &dyn LabelSource, n: usize, init: T, step: F) -> Result<Vec<T>>
where
    T: Clone + Send + Sync,
    F: Fn(&T, usize, usize) -> Result<T> + Sync,
{
    let arity = src.params().arity();
    check_full(n, arity)?;
    let split = n.min(8);
    let mut top = vec![(VertexPath::ROOT, init)];
    for level in 1..=split {
        let mut next = Vec::with_capacity(top.len() * arity);
        for (v, s) in &top {
            for b in 0..arity {
                let c = v.child(arity, b);
                next.push((c, step(s, src.label(c), level)?));
            }
        }
        top = next;
    }
    let parts: Vec<Vec<T>> = top
        .into_par_iter()
        .map(|(v, s)| {
            let mut out = Vec::with_capacity(arity.pow((n - split) as u32));
            dfs(src, v, s, n, arity, &step, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn dfs<T, F>(
    src: &dyn LabelSource,
    v: VertexPath,
    s: T,
    n: usize,
    arity: usize,
    step: &F,
    out: &mut Vec<T>,
) -> Result<()>
where
    T: Clone,
    F: Fn(&T, usize, usize) -> Result<T>,
{
    if v.depth as usize == n {
        out.push(s);
        return Ok(());
    }
    for b in 0..arity {
        let c = v.child(arity, b);
        let cs = step(&s, src.label(c), c.depth as usize)?;
        dfs(src, c, cs, n, arity, step, out)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafMode {
    Full,
    /// Uniform leaves of the same labeled tree, drawn with their own seed.
    Sample {
        count: usize,
        seed: u64,
    },
}

/// f(v) for a single vertex, summed in the same order as full enumeration so
/// both agree bit for bit.
pub fn vertex_value(src: &dyn LabelSource, v: VertexPath) -> f64 {
    let p = src.params();
    let arity = p.arity();
    let lam = p.lambda();
    let mut acc = 0.0;
    for d in 1..=v.depth {
        let a = v.ancestor(arity, d);
        acc += p.digits()[src.label(a)].value * lam.powi(d as i32);
    }
    acc
}

/// Leaf values f(v) at depth n.
pub fn leaf_values(src: &dyn LabelSource, n: usize, mode: LeafMode) -> Result<Vec<f64>> {
    let p = src.params();
    let arity = p.arity();
    match mode {
        LeafMode::Full => {
            let lam = p.lambda();
            let pows: Vec<f64> = (0..=n).map(|j| lam.powi(j as i32)).collect();
            let vals = p.digit_values();
            expand_leaves(src, n, 0.0f64, |s, d, j| Ok(s + vals[d] * pows[j]))
        }
        LeafMode::Sample { count, seed } => {
            check_depth(n, arity)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let leaves: Vec<VertexPath> = (0..count)
                .map(|_| {
                    let mut v = VertexPath::ROOT;
                    for _ in 0..n {
                        v = v.child(arity, rng.gen_range(0..arity));
                    }
                    v
                })
                .collect();
            Ok(leaves.par_iter().map(|&v| vertex_value(src, v)).collect())
        }
    }
}

/// Numerators θ^n f(v) in ℤ[θ] for every leaf at depth n, in leaf order.
pub fn leaf_values_exact(src: &dyn LabelSource, n: usize) -> Result<Vec<AlgebraicValue>> {
    if n > MAX_EXACT_DEPTH {
        return Err(Error::DepthTooLarge {
            depth: n,
            what: "exact digit string length",
            count: n as f64,
            limit: MAX_EXACT_DEPTH as f64,
        });
    }
    let (ring, digits) = src.params().exact()?;
    expand_leaves(src, n, ring.zero(), |s, d, _| ring.shift_add(s, digits[d]))
}

/// Digit words a(v) = a_{v|1} … a_{v|n} packed base m.
fn leaf_words(src: &dyn LabelSource, n: usize) -> Result<Vec<u128>> {
    let m = src.params().digits().len() as u128;
    if (n as f64) * (m as f64).log2() > 127.0 {
        return Err(Error::DepthTooLarge {
            depth: n,
            what: "packed word size in bits",
            count: (n as f64) * (m as f64).log2(),
            limit: 127.0,
        });
    }
    expand_leaves(src, n, 0u128, |w, d, _| Ok(w * m + d as u128))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinctPrefixes {
    /// K_n: number of distinct digit words seen from the root at depth n.
    pub word_count: usize,
    /// Distinct values f(v), strictly increasing.
    pub values: Vec<f64>,
}

/// K_n and the distinct level-n values. Exact mode deduplicates values in
/// ℤ[θ]; float mode merges values closer than `float_merge_tolerance`.
pub fn distinct_prefixes(src: &dyn LabelSource, n: usize, exact: bool) -> Result<DistinctPrefixes> {
    let mut words = leaf_words(src, n)?;
    words.par_sort_unstable();
    words.dedup();
    let values = if exact {
        let (ring, _) = src.params().exact()?;
        let set: HashSet<AlgebraicValue> = leaf_values_exact(src, n)?.into_iter().collect();
        let scale = src.params().lambda().powi(n as i32);
        let mut keyed: Vec<(f64, AlgebraicValue)> = set
            .into_iter()
            .map(|a| (ring.to_f64(&a) * scale, a))
            .collect();
        // values at a common scale are either equal or separated, so the f64
        // order is refined exactly only where it is ambiguous
        let mut err = None;
        keyed.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then_with(|| {
                ring.cmp(&a.1, &b.1).unwrap_or_else(|e| {
                    err = Some(e);
                    std::cmp::Ordering::Equal
                })
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        keyed.into_iter().map(|(f, _)| f).collect()
    } else {
        let mut v = leaf_values(src, n, LeafMode::Full)?;
        v.par_sort_unstable_by(f64::total_cmp);
        merge_close(&v, float_merge_tolerance(src.params(), n))
    };
    Ok(DistinctPrefixes {
        word_count: words.len(),
        values,
    })
}

/// Half the separation estimated at depth min(n, 16) for binary digit sets,
/// and 1e-12·λ^n otherwise.
pub fn float_merge_tolerance(params: &ParameterSet, n: usize) -> f64 {
    let lam_n = params.lambda().powi(n as i32);
    if params.is_binary_01() && n > 0 {
        if let Ok(rows) = crate::support::separation_constant(params, n.min(16)) {
            let c = rows
                .iter()
                .map(|r| r.normalized_gap)
                .fold(f64::INFINITY, f64::min);
            if c.is_finite() && c > 0.0 {
                return 0.5 * c * lam_n;
            }
        }
    }
    1e-12 * lam_n
}

/// Collapses runs of sorted values whose consecutive gaps are at most `tol`,
/// keeping the first value of each run.
pub fn merge_close(sorted: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    let mut last = f64::NEG_INFINITY;
    for &x in sorted {
        if x - last > tol {
            out.push(x);
        }
        last = x;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extinction {
    /// First level at which the cluster is empty.
    Level(usize),
    /// Still alive at the maximal depth examined.
    Survived(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GwCluster {
    pub extinction: Extinction,
    /// Cluster size at relative depth 0, 1, …; entry 0 is the root.
    pub level_sizes: Vec<usize>,
}

impl GwCluster {
    pub fn survives_to(&self, n: usize) -> bool {
        self.level_sizes.get(n).is_some_and(|&s| s > 0)
    }
}

/// The cluster of vertices below `root` whose labels are all `one` on the path
/// from `root` (exclusive) down; the root itself is counted present.
pub fn cluster_below(
    src: &dyn LabelSource,
    root: VertexPath,
    one: usize,
    max_depth: usize,
) -> Result<GwCluster> {
    let arity = src.params().arity();
    check_depth(root.depth as usize + max_depth, arity)?;
    let mut level = vec![root];
    let mut sizes = vec![1];
    for k in 1..=max_depth {
        let next: Vec<VertexPath> = level
            .iter()
            .flat_map(|v| (0..arity).map(move |b| v.child(arity, b)))
            .filter(|&c| src.label(c) == one)
            .collect();
        sizes.push(next.len());
        if next.is_empty() {
            return Ok(GwCluster {
                extinction: Extinction::Level(k),
                level_sizes: sizes,
            });
        }
        level = next;
    }
    Ok(GwCluster {
        extinction: Extinction::Survived(max_depth),
        level_sizes: sizes,
    })
}

/// Binary tree with fair {0, 1} labels; each 1-labeled vertex has
/// Binomial(2, ½) children labeled 1.
pub fn gw_cluster(seed: u64, max_depth: usize) -> Result<GwCluster> {
    if max_depth == 0 {
        return Err(Error::InvalidParameter(
            "max_depth must be at least 1".into(),
        ));
    }
    let params = ParameterSet::bernoulli(0.5)?;
    let oracle = LabelOracle::new(seed, params);
    cluster_below(&oracle, VertexPath::ROOT, 1, max_depth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub n: usize,
    pub probability: f64,
    pub stderr: f64,
}

/// Monte-Carlo survival probabilities of the critical cluster, one shared set
/// of `reps` replicas for all depths.
pub fn survival_curve(depths: &[usize], reps: usize, seed: u64) -> Result<Vec<SurvivalPoint>> {
    if reps < 1000 {
        return Err(Error::InvalidParameter(format!(
            "survival_curve needs at least 1000 replicas, got {reps}"
        )));
    }
    let max_n = depths.iter().copied().max().unwrap_or(0);
    let reached: Vec<usize> = (0..reps as u64)
        .into_par_iter()
        .map(|k| {
            if max_n == 0 {
                return Ok(0);
            }
            let c = gw_cluster(replica_seed(seed, k), max_n)?;
            Ok(c.level_sizes.iter().rposition(|&s| s > 0).unwrap_or(0))
        })
        .collect::<Result<_>>()?;
    Ok(depths
        .iter()
        .map(|&n| {
            let alive = reached.iter().filter(|&&r| r >= n).count();
            let p = alive as f64 / reps as f64;
            SurvivalPoint {
                n,
                probability: p,
                stderr: (p * (1.0 - p) / reps as f64).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::uniform_digits;

    fn oracle(seed: u64, lam: f64) -> LabelOracle {
        LabelOracle::new(seed, ParameterSet::bernoulli(lam).unwrap())
    }

    #[test]
    fn path_arithmetic() {
        let v = VertexPath::ROOT.child(3, 2).child(3, 0).child(3, 1);
        assert_eq!(v.branches(3), vec![2, 0, 1]);
        assert_eq!(v.parent(3).unwrap().branches(3), vec![2, 0]);
        assert_eq!(v.ancestor(3, 1).branches(3), vec![2]);
        assert_eq!(VertexPath::max_depth(2), 127);
    }

    #[test]
    fn depth_zero_and_one() {
        let o = oracle(3, 0.7);
        assert_eq!(leaf_values(&o, 0, LeafMode::Full).unwrap(), vec![0.0]);
        let v = leaf_values(&o, 1, LeafMode::Full).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|&x| x == 0.0 || x == 0.7));
    }

    #[test]
    fn full_mode_guard() {
        let o = oracle(1, 0.7);
        assert!(matches!(
            leaf_values(&o, 27, LeafMode::Full),
            Err(Error::DepthTooLarge { .. })
        ));
    }

    #[test]
    fn full_matches_pointwise_values() {
        let o = LabelOracle::new(
            9,
            ParameterSet::new(0.6, 3, uniform_digits(&[-1.0, 0.0, 2.5])).unwrap(),
        );
        let v = leaf_values(&o, 6, LeafMode::Full).unwrap();
        for (i, &x) in v.iter().enumerate().step_by(37) {
            let y = vertex_value(
                &o,
                VertexPath {
                    depth: 6,
                    index: i as u128,
                },
            );
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn sample_is_submultiset_of_full() {
        let o = oracle(5, 0.65);
        let full: HashSet<u64> = leaf_values(&o, 12, LeafMode::Full)
            .unwrap()
            .into_iter()
            .map(f64::to_bits)
            .collect();
        let s = leaf_values(
            &o,
            12,
            LeafMode::Sample {
                count: 500,
                seed: 2,
            },
        )
        .unwrap();
        assert!(s.iter().all(|x| full.contains(&x.to_bits())));
    }

    #[test]
    fn exact_distinct_values_at_golden() {
        let p = ParameterSet::bernoulli_exact("-1,-1,1".parse().unwrap()).unwrap();
        let o = LabelOracle::new(4, p);
        let d0 = distinct_prefixes(&o, 0, true).unwrap();
        assert_eq!((d0.word_count, d0.values.clone()), (1, vec![0.0]));
        let d = distinct_prefixes(&o, 12, true).unwrap();
        assert!(d.values.windows(2).all(|w| w[0] < w[1]));
        assert!(d.word_count <= 1 << 12);
        let f = distinct_prefixes(&o, 12, false).unwrap();
        assert_eq!(d.values.len(), f.values.len());
    }

    #[test]
    fn forced_extinction() {
        struct Zeros(ParameterSet);
        impl LabelSource for Zeros {
            fn params(&self) -> &ParameterSet {
                &self.0
            }
            fn label(&self, _: VertexPath) -> usize {
                0
            }
        }
        let z = Zeros(ParameterSet::bernoulli(0.5).unwrap());
        let c = cluster_below(&z, VertexPath::ROOT, 1, 10).unwrap();
        assert_eq!(c.extinction, Extinction::Level(1));
        assert_eq!(c.level_sizes, vec![1, 0]);
    }

    #[test]
    fn cluster_doubling_bound() {
        for s in 0..200 {
            let c = gw_cluster(s, 40).unwrap();
            assert_eq!(c.level_sizes[0], 1);
            for w in c.level_sizes.windows(2) {
                assert!(w[1] <= 2 * w[0]);
            }
        }
    }

    #[test]
    fn survival_requires_reps() {
        assert!(survival_curve(&[1], 999, 0).is_err());
        let s = survival_curve(&[0], 1000, 0).unwrap();
        assert_eq!(s[0].probability, 1.0);
    }
}
