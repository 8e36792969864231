//! Level-n support covers S(n) = ∪_{|v|=n} I(v), their gaps, the Garsia
//! separation constant, and the maximal-vertex probe that tracks how gaps
//! accumulate next to a rational point q ∉ S.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AlgebraicValue, Mode, ParameterSet, ThetaRing};
use crate::tree::{leaf_values, leaf_values_exact, LabelSource, LeafMode, VertexPath};

/// Endpoint slack used when merging intervals in float mode.
pub const MERGE_SLACK: f64 = 1e-12;

/// Gaps narrower than this are not reported in float mode.
pub const MIN_FLOAT_GAP: f64 = 1e-10;

/// Largest depth for the exhaustive separation sweep.
pub const MAX_SEPARATION_DEPTH: usize = 22;

/// Sorted, pairwise disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Union of arbitrary closed intervals; pieces within `slack` are joined.
    pub fn from_intervals(mut iv: Vec<(f64, f64)>, slack: f64) -> Self {
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (lo, hi) in iv {
            debug_assert!(lo <= hi);
            match out.last_mut() {
                Some(last) if lo <= last.1 + slack => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn union(&self, other: &IntervalSet, slack: f64) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::from_intervals(all, slack)
    }

    pub fn contains_point(&self, x: f64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 < x);
        i < self.intervals.len() && self.intervals[i].0 <= x
    }

    /// Whether every interval of `other` lies inside one interval of `self`.
    pub fn contains_set(&self, other: &IntervalSet, tol: f64) -> bool {
        other.intervals.iter().all(|&(lo, hi)| {
            let i = self.intervals.partition_point(|iv| iv.1 < hi - tol);
            i < self.intervals.len()
                && self.intervals[i].0 <= lo + tol
                && self.intervals[i].1 >= hi - tol
        })
    }
}

/// Distinct numerators θ^n f(v) in increasing order of value.
pub fn sorted_distinct(
    ring: &ThetaRing,
    mut vals: Vec<AlgebraicValue>,
) -> Result<Vec<AlgebraicValue>> {
    let set: HashSet<AlgebraicValue> = vals.drain(..).collect();
    let mut keyed: Vec<(f64, AlgebraicValue)> =
        set.into_iter().map(|a| (ring.to_f64(&a), a)).collect();
    let mut err = None;
    keyed.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then_with(|| {
            ring.cmp(&a.1, &b.1).unwrap_or_else(|e| {
                err = Some(e);
                Ordering::Equal
            })
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    // neighbours whose f64 images are very close get an exact check
    for w in keyed.windows(2) {
        if (w[1].0 - w[0].0).abs() <= 1e-9 * w[1].0.abs().max(1.0)
            && ring.cmp(&w[0].1, &w[1].1)? != Ordering::Less
        {
            return Err(Error::SignUndetermined { bound: 0.0 });
        }
    }
    Ok(keyed.into_iter().map(|(_, a)| a).collect())
}

/// Merges level-n intervals [P/θ^n, P/θ^n + λ^n·w] from sorted numerators,
/// joining neighbours exactly when (P₂ − P₁)(θ − 1) ≤ width, where the hull
/// of the digit set is [dmin, dmax]/(θ − 1) and width = dmax − dmin.
pub fn merge_exact(
    params: &ParameterSet,
    n: usize,
    sorted: &[AlgebraicValue],
) -> Result<IntervalSet> {
    let (ring, digits) = params.exact()?;
    let width = digits.iter().max().unwrap() - digits.iter().min().unwrap();
    let (hlo, hhi) = params.hull();
    let lam_n = params.lambda().powi(n as i32);
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<&AlgebraicValue> = None;
    for p in sorted {
        let x = ring.to_f64(p) * lam_n;
        let iv = (x + lam_n * hlo, x + lam_n * hhi);
        let joined = match prev {
            Some(q) => {
                let d = ring.sub(p, q)?;
                let t = ring.sub(&ring.sub(&ring.mul_theta(&d)?, &d)?, &ring.from_int(width))?;
                ring.sign(&t)? != Ordering::Greater
            }
            None => false,
        };
        match out.last_mut() {
            Some(last) if joined => last.1 = iv.1,
            _ => out.push(iv),
        }
        prev = Some(p);
    }
    Ok(IntervalSet { intervals: out })
}

/// S(n) for one labeled tree.
pub fn support_cover(src: &dyn LabelSource, n: usize, exact: bool) -> Result<IntervalSet> {
    let p = src.params();
    if exact {
        let (ring, _) = p.exact()?;
        let sorted = sorted_distinct(ring, leaf_values_exact(src, n)?)?;
        return merge_exact(p, n, &sorted);
    }
    let (hlo, hhi) = p.hull();
    let lam_n = p.lambda().powi(n as i32);
    let vals = leaf_values(src, n, LeafMode::Full)?;
    let iv = vals
        .into_iter()
        .map(|x| (x + lam_n * hlo, x + lam_n * hhi))
        .collect();
    Ok(IntervalSet::from_intervals(iv, MERGE_SLACK))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub level: usize,
    pub gaps: Vec<(f64, f64)>,
    /// Gaps narrower than the reporting threshold.
    pub suppressed: usize,
}

/// Bounded components of the complement of a cover, skipping those narrower
/// than `min_width`.
pub fn gaps(cover: &IntervalSet, level: usize, min_width: f64) -> GapReport {
    let mut out = Vec::new();
    let mut suppressed = 0;
    for w in cover.intervals.windows(2) {
        let g = (w[0].1, w[1].0);
        if g.1 - g.0 < min_width {
            suppressed += 1;
        } else {
            out.push(g);
        }
    }
    GapReport {
        level,
        gaps: out,
        suppressed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub n: usize,
    /// Smallest nonzero difference of two level-n digit sums.
    pub min_gap: f64,
    /// min_gap / λ^n.
    pub normalized_gap: f64,
    pub distinct: usize,
}

/// Minimum nonzero spacing of {Σ_{i≤n} a_i λ^i : a ∈ {0,1}^n} for n = 1..=n_max,
/// in ℤ[θ] when a minimal polynomial is present.
pub fn separation_constant(params: &ParameterSet, n_max: usize) -> Result<Vec<SeparationRow>> {
    let mode = if params.has_exact() {
        Mode::Exact
    } else {
        Mode::Float
    };
    separation_constant_with(params, n_max, mode)
}

pub fn separation_constant_with(
    params: &ParameterSet,
    n_max: usize,
    mode: Mode,
) -> Result<Vec<SeparationRow>> {
    if !params.is_binary_01() {
        return Err(Error::DigitSetUnsupported(
            "the separation constant is defined for digits {0, 1}".into(),
        ));
    }
    if n_max > MAX_SEPARATION_DEPTH {
        return Err(Error::DepthTooLarge {
            depth: n_max,
            what: "number of digit words",
            count: 2f64.powi(n_max as i32),
            limit: 2f64.powi(MAX_SEPARATION_DEPTH as i32),
        });
    }
    let lam = params.lambda();
    let mut rows = Vec::with_capacity(n_max);
    match mode {
        Mode::Exact => {
            let (ring, _) = params.exact()?;
            let mut cur = vec![ring.zero()];
            for n in 1..=n_max {
                let mut next = Vec::with_capacity(cur.len() * 2);
                for v in &cur {
                    next.push(ring.shift_add(v, 0)?);
                    next.push(ring.shift_add(v, 1)?);
                }
                cur = sorted_distinct(ring, next)?;
                // the normalized difference is the embedding of P₂ − P₁
                let mut best = f64::INFINITY;
                for w in cur.windows(2) {
                    best = best.min(ring.to_f64(&ring.sub(&w[1], &w[0])?));
                }
                rows.push(SeparationRow {
                    n,
                    min_gap: best * lam.powi(n as i32),
                    normalized_gap: best,
                    distinct: cur.len(),
                });
            }
        }
        Mode::Float => {
            let mut cur = vec![0.0f64];
            for n in 1..=n_max {
                let lam_n = lam.powi(n as i32);
                let mut next: Vec<f64> = cur.iter().flat_map(|&v| [v, v + lam_n]).collect();
                next.sort_by(f64::total_cmp);
                // differences below 1e-8·λ^n are rounding noise on equal sums
                let tie = 1e-8 * lam_n;
                cur = crate::tree::merge_close(&next, tie);
                let best = cur
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                rows.push(SeparationRow {
                    n,
                    min_gap: best,
                    normalized_gap: best / lam_n,
                    distinct: cur.len(),
                });
            }
        }
    }
    Ok(rows)
}

/// Smallest ℓ ≥ 1 with λ^(ℓ+1)/(1−λ) < c₁. The comparison uses c₁(1 − 1e-9)
/// so that exact ties resolve to the larger ℓ.
pub fn gap_depth(lambda: f64, c1: f64) -> Result<usize> {
    if !(c1 > 0.0) || !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need c1 > 0 and lambda in (0, 1), got c1 = {c1}, lambda = {lambda}"
        )));
    }
    let target = c1 * (1.0 - 1e-9);
    let mut l = 1;
    while lambda.powi(l as i32 + 1) / (1.0 - lambda) >= target {
        l += 1;
    }
    Ok(l)
}

/// A vertex together with θ^|v| f(v) and f(v).
#[derive(Debug, Clone)]
struct Node {
    v: VertexPath,
    numer: AlgebraicValue,
    value: f64,
}

/// Exact comparisons of level-k values against q = a/b.
struct QContext<'a> {
    ring: &'a ThetaRing,
    a: i64,
    b: i64,
    lam: f64,
    h: f64,
    theta_pows: Vec<AlgebraicValue>,
}

impl<'a> QContext<'a> {
    fn theta_pow(&mut self, k: usize) -> Result<&AlgebraicValue> {
        while self.theta_pows.len() <= k {
            let next = self.ring.mul_theta(self.theta_pows.last().unwrap())?;
            self.theta_pows.push(next);
        }
        Ok(&self.theta_pows[k])
    }

    /// Sign of f(v) − q.
    fn cmp_value(&mut self, numer: &AlgebraicValue, k: usize) -> Result<Ordering> {
        let ring = self.ring;
        let (a, b) = (self.a, self.b);
        let lhs = ring.scale_int(numer, b)?;
        let rhs = ring.scale_int(self.theta_pow(k)?, a)?;
        ring.sign(&ring.sub(&lhs, &rhs)?)
    }

    /// Sign of f(v) + λ^k/(θ−1) − q, i.e. of b(θ−1)P + b − aθ^k(θ−1).
    fn cmp_reach(&mut self, numer: &AlgebraicValue, k: usize) -> Result<Ordering> {
        let ring = self.ring;
        let (a, b) = (self.a, self.b);
        let t = self.theta_pow(k)?.clone();
        let pm = ring.sub(&ring.mul_theta(numer)?, numer)?;
        let tm = ring.sub(&ring.mul_theta(&t)?, &t)?;
        let lhs = ring.add(&ring.scale_int(&pm, b)?, &ring.from_int(b))?;
        let rhs = ring.scale_int(&tm, a)?;
        ring.sign(&ring.sub(&lhs, &rhs)?)
    }

    fn reach(&self, node: &Node) -> f64 {
        node.value + self.lam.powi(node.v.depth as i32) * self.h
    }
}

/// Summary of one cluster Γ^(n) started from the maximal vertices at level n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDiagnostic {
    pub n: usize,
    /// Last level at which Γ^(n) is nonempty; `None` if tracking was cut off.
    pub tau: Option<usize>,
    /// |Γ^(n)_j| for j = n, n+1, …
    pub sizes: Vec<usize>,
    /// |Γ_j| = |M^(j)| at every level j ≤ min(τ, n_max) where both are known.
    pub matches_maximal: bool,
    pub event: bool,
    /// Rightmost vertex of Γ at level τ, as (depth, index).
    pub last_vertex: Option<VertexPath>,
    pub gap: Option<GapWitness>,
    pub truncated: bool,
}

/// A gap of S(level) inside (α − λ^n/(1−λ), α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapWitness {
    pub level: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub q: String,
    pub ell_star: usize,
    /// First level with q ∉ S(n₀), if it is at most n_max.
    pub n0: Option<usize>,
    /// (level, |M^(level)|) for n₀ ≤ level ≤ n_max.
    pub maximal_counts: Vec<(usize, usize)>,
    /// (level, m^(level)) for the same levels; absent when no value lies below q.
    pub maximal_values: Vec<(usize, Option<f64>)>,
    pub clusters: Vec<ClusterDiagnostic>,
}

impl ProbeReport {
    pub fn events(&self) -> usize {
        self.clusters.iter().filter(|c| c.event).count()
    }
}

/// Deepest level tracked by the probe (exact numerators stay inside i64).
pub const PROBE_MAX_LEVEL: usize = 80;
/// Cluster size beyond which tracking stops.
pub const PROBE_MAX_CLUSTER: usize = 1 << 16;
/// Frontier size beyond which the probe gives up.
pub const PROBE_MAX_FRONTIER: usize = 1 << 20;

fn children_nodes(
    src: &dyn LabelSource,
    ring: &ThetaRing,
    digits: &[i64],
    node: &Node,
) -> Result<Vec<Node>> {
    let p = src.params();
    let arity = p.arity();
    let lam = p.lambda();
    (0..arity)
        .map(|b| {
            let c = node.v.child(arity, b);
            let d = src.label(c);
            Ok(Node {
                v: c,
                numer: ring.shift_add(&node.numer, digits[d])?,
                value: node.value + p.digits()[d].value * lam.powi(c.depth as i32),
            })
        })
        .collect()
}

/// Walks levels 0..=last keeping every vertex that could still lead to the
/// largest value below q (or reach `floor`), calling `visit` on each level's
/// kept vertices together with the number of vertices whose interval
/// contains q.
fn frontier<F>(
    src: &dyn LabelSource,
    ctx: &mut QContext,
    digits: &[i64],
    last: usize,
    floor: f64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &[Node], usize, &mut QContext) -> Result<bool>,
{
    let ring = ctx.ring;
    let mut level = vec![Node {
        v: VertexPath::ROOT,
        numer: ring.zero(),
        value: 0.0,
    }];
    for k in 0..=last {
        if k > 0 {
            let mut next = Vec::with_capacity(level.len() * 2);
            for node in &level {
                for c in children_nodes(src, ring, digits, node)? {
                    if ctx.cmp_value(&c.numer, k)? != Ordering::Greater {
                        next.push(c);
                    }
                }
            }
            level = next;
        }
        // lb: largest value whose whole interval lies below q
        let mut lb = f64::NEG_INFINITY;
        let mut covering = 0;
        for node in &level {
            if ctx.cmp_reach(&node.numer, k)? == Ordering::Less {
                lb = lb.max(node.value);
            } else {
                covering += 1;
            }
        }
        // with an explicit floor everything above it is wanted, not just the top
        let keep = if floor.is_finite() { floor } else { lb };
        let bound = keep - 1e-9 * ctx.lam.powi(k as i32);
        level.retain(|node| ctx.reach(node) >= bound);
        if level.len() > PROBE_MAX_FRONTIER {
            return Err(Error::StateLimit {
                what: "probe frontier",
                count: level.len(),
                limit: PROBE_MAX_FRONTIER,
            });
        }
        if !visit(k, &level, covering, ctx)? {
            break;
        }
    }
    Ok(())
}

/// Vertices of `level` achieving the largest value (all lie below q).
fn maximal(ring: &ThetaRing, level: &[Node]) -> Result<Vec<Node>> {
    if level.is_empty() {
        return Ok(Vec::new());
    }
    let top = level
        .iter()
        .map(|n| n.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<&Node> = level
        .iter()
        .filter(|n| n.value >= top - 1e-9 * top.abs().max(1e-300))
        .collect();
    let mut best = near[0];
    for n in &near[1..] {
        if ring.cmp(&n.numer, &best.numer)? == Ordering::Greater {
            best = n;
        }
    }
    Ok(near
        .into_iter()
        .filter(|n| n.numer == best.numer)
        .cloned()
        .collect())
}

/// Runs the maximal-vertex probe for q = a/b on one labeled tree.
pub fn gap_neighborhood_probe(
    src: &dyn LabelSource,
    a: i64,
    b: i64,
    n_max: usize,
    ell_star: usize,
) -> Result<ProbeReport> {
    let params = src.params();
    let (ring, digits) = params.exact()?;
    if !params.is_binary_01() || params.arity() != 2 {
        return Err(Error::DigitSetUnsupported(
            "the probe needs the binary tree with digits {0, 1}".into(),
        ));
    }
    if b <= 0 {
        return Err(Error::InvalidParameter(
            "q must have a positive denominator".into(),
        ));
    }
    if n_max + 2 * ell_star + 8 > PROBE_MAX_LEVEL {
        return Err(Error::DepthTooLarge {
            depth: n_max,
            what: "probe depth",
            count: (n_max + 2 * ell_star + 8) as f64,
            limit: PROBE_MAX_LEVEL as f64,
        });
    }
    let q = a as f64 / b as f64;
    let (lo, hi) = params.hull();
    if !(q >= lo && q <= hi) {
        return Err(Error::QOutsideHull { q, lo, hi });
    }
    let mut ctx = QContext {
        ring,
        a,
        b,

        lam: params.lambda(),
        h: hi,
        theta_pows: vec![ring.from_int(1)],
    };

    let mut n0 = None;
    let mut maxima: Vec<(usize, Vec<Node>)> = Vec::new();
    frontier(
        src,
        &mut ctx,
        digits,
        n_max,
        f64::NEG_INFINITY,
        |k, level, covering, _| {
            if n0.is_none() && covering == 0 {
                n0 = Some(k);
            }
            if n0.is_some() {
                maxima.push((k, maximal(ring, level)?));
            }
            Ok(true)
        },
    )?;

    let mut report = ProbeReport {
        q: format!("{a}/{b}"),
        ell_star,
        n0,
        maximal_counts: maxima.iter().map(|(k, m)| (*k, m.len())).collect(),
        maximal_values: maxima
            .iter()
            .map(|(k, m)| (*k, m.first().map(|x| x.value)))
            .collect(),
        clusters: Vec::new(),
    };
    let Some(n0) = n0 else {
        return Ok(report);
    };

    let one = digits.iter().position(|&d| d == 1).unwrap();
    let mut n = n0;
    while n <= n_max {
        let start = &maxima[n - n0].1;
        if start.is_empty() {
            // every value lies above q: q sits left of the whole support
            break;
        }
        let diag = track_cluster(
            src, &mut ctx, digits, one, n, start, &maxima, n0, n_max, ell_star,
        )?;
        report.clusters.push(diag);
        n += ell_star + 1;
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn track_cluster(
    src: &dyn LabelSource,
    ctx: &mut QContext,
    digits: &[i64],
    one: usize,
    n: usize,
    start: &[Node],
    maxima: &[(usize, Vec<Node>)],
    n0: usize,
    n_max: usize,
    ell: usize,
) -> Result<ClusterDiagnostic> {
    let ring = ctx.ring;
    let limit = PROBE_MAX_LEVEL - ell - 5;
    let mut levels: Vec<Vec<Node>> = vec![start.to_vec()];
    let mut truncated = false;
    loop {
        let depth = n + levels.len() - 1;
        let cur = levels.last().unwrap();
        if depth >= limit || cur.len() > PROBE_MAX_CLUSTER {
            truncated = true;
            break;
        }
        let mut next = Vec::new();
        for node in cur {
            for c in children_nodes(src, ring, digits, node)? {
                if src.label(c.v) == one {
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    let sizes: Vec<usize> = levels.iter().map(Vec::len).collect();
    let matches_maximal = sizes
        .iter()
        .enumerate()
        .filter(|(j, _)| n + j <= n_max)
        .all(|(j, &s)| maxima[n + j - n0].1.len() == s);
    if truncated {
        return Ok(ClusterDiagnostic {
            n,
            tau: None,
            sizes,
            matches_maximal,
            event: false,
            last_vertex: None,
            gap: None,
            truncated,
        });
    }
    let tau = n + levels.len() - 1;
    let last_vertex = levels.last().unwrap().iter().map(|x| x.v).max();
    let event =
        tau >= n + ell && (0..=ell).all(|j| levels[tau - j - n].len() == 1usize << (ell - j));
    let gap = if event {
        let sigma = &levels[tau - ell - n][0];
        lemma44_gap(src, ctx, digits, sigma, tau, ell)?
    } else {
        None
    };
    Ok(ClusterDiagnostic {
        n,
        tau: Some(tau),
        sizes,
        matches_maximal,
        event,
        last_vertex,
        gap,
        truncated,
    })
}

/// Looks for a gap of S(N), τ < N ≤ τ+ℓ+4, inside [f(σ) − λ^(τ−ℓ), α_N]
/// lying to the left of the topmost component below q.
fn lemma44_gap(
    src: &dyn LabelSource,
    ctx: &mut QContext,
    digits: &[i64],
    sigma: &Node,
    tau: usize,
    ell: usize,
) -> Result<Option<GapWitness>> {
    let ring = ctx.ring;
    let params = src.params();
    let floor = sigma.value - ctx.lam.powi((tau - ell) as i32);
    let mut found = None;
    frontier(src, ctx, digits, tau + ell + 4, floor, |k, level, _, _| {
        if k <= tau {
            return Ok(true);
        }
        let numers: Vec<AlgebraicValue> = level.iter().map(|n| n.numer.clone()).collect();
        let sorted = sorted_distinct(ring, numers)?;
        let cover = merge_exact(params, k, &sorted)?;
        let comps = cover.intervals();
        // components wholly right of the floor; the last one holds α_k
        if let Some(w) = comps.windows(2).find(|w| w[0].1 > floor) {
            found = Some(GapWitness {
                level: k,
                lo: w[0].1,
                hi: w[1].0,
            });
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(found)
}

/// Relabels the subtree below `w` so that its first child starts a full
/// binary cluster of 1's of depth ℓ whose leaves all have 0-labelled
/// children; every other label is taken from `base`.
pub struct ForcedCluster<'a> {
    base: &'a dyn LabelSource,
    w: VertexPath,
    ell: usize,
    zero: usize,
    one: usize,
}

impl<'a> ForcedCluster<'a> {
    pub fn new(base: &'a dyn LabelSource, w: VertexPath, ell: usize) -> Result<Self> {
        let p = base.params();
        if !p.is_binary_01() || p.arity() != 2 {
            return Err(Error::DigitSetUnsupported(
                "forced clusters need the binary tree with digits {0, 1}".into(),
            ));
        }
        let vals = p.digit_values();
        let zero = vals.iter().position(|&d| d == 0.0).unwrap();
        let one = vals.iter().position(|&d| d == 1.0).unwrap();
        Ok(ForcedCluster {
            base,
            w,
            ell,
            zero,
            one,
        })
    }
}

impl LabelSource for ForcedCluster<'_> {
    fn params(&self) -> &ParameterSet {
        self.base.params()
    }

    fn label(&self, v: VertexPath) -> usize {
        let d = self.w.depth;
        if v.depth > d && v.ancestor(2, d) == self.w && v.ancestor(2, d + 1) == self.w.child(2, 0) {
            let rel = (v.depth - d) as usize;
            if rel <= self.ell + 1 {
                return self.one;
            }
            if rel == self.ell + 2 {
                return self.zero;
            }
        }
        self.base.label(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::LabelOracle;

    fn golden() -> ParameterSet {
        ParameterSet::bernoulli_exact("-1,-1,1".parse().unwrap()).unwrap()
    }

    #[test]
    fn interval_set_basics() {
        let s = IntervalSet::from_intervals(vec![(2.0, 3.0), (0.0, 1.0), (0.5, 1.5)], 0.0);
        assert_eq!(s.intervals(), &[(0.0, 1.5), (2.0, 3.0)]);
        assert!(s.contains_point(2.5) && !s.contains_point(1.7));
        let t = IntervalSet::from_intervals(vec![(0.1, 0.2), (2.0, 2.5)], 0.0);
        assert!(s.contains_set(&t, 0.0));
        assert!(!t.contains_set(&s, 0.0));
    }

    #[test]
    fn gap_examples() {
        let one = IntervalSet::from_intervals(vec![(0.0, 1.0)], 0.0);
        assert!(gaps(&one, 0, 0.0).gaps.is_empty());
        let two = IntervalSet::from_intervals(vec![(0.0, 1.0), (2.0, 3.0)], 0.0);
        assert_eq!(gaps(&two, 0, 0.0).gaps, vec![(1.0, 2.0)]);
    }

    #[test]
    fn level_zero_cover_is_hull() {
        let o = LabelOracle::new(1, golden());
        for exact in [true, false] {
            let s = support_cover(&o, 0, exact).unwrap();
            assert_eq!(s.len(), 1);
            let (a, b) = s.intervals()[0];
            assert_eq!(a, 0.0);
            assert!((b - 1.0 / golden().lambda()).abs() < 1e-15);
        }
    }

    #[test]
    fn separation_first_levels() {
        let rows = separation_constant(&golden(), 4).unwrap();
        assert!((rows[0].normalized_gap - 1.0).abs() < 1e-15);
        let g = golden().lambda();
        assert!((rows[1].normalized_gap - g).abs() < 1e-15);
        let f = separation_constant_with(&golden(), 4, Mode::Float).unwrap();
        for (x, y) in rows.iter().zip(&f) {
            assert!((x.normalized_gap - y.normalized_gap).abs() < 1e-9);
            assert_eq!(x.distinct, y.distinct);
        }
    }

    #[test]
    fn gap_depth_examples() {
        let g = golden().lambda();
        assert_eq!(gap_depth(g, 1.0).unwrap(), 2);
        assert_eq!(gap_depth(g, g).unwrap(), 3);
        assert!(gap_depth(g, 2.0).unwrap() <= gap_depth(g, 1.0).unwrap());
        assert!(gap_depth(g, 0.0).is_err());
    }

    #[test]
    fn probe_rejects_points_outside_hull() {
        let o = LabelOracle::new(1, golden());
        assert!(matches!(
            gap_neighborhood_probe(&o, -1, 2, 10, 3),
            Err(Error::QOutsideHull { .. })
        ));
    }
}
