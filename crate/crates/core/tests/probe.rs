//! Maximal-vertex probe: brute-force cross-checks and planted events.

use brw_core::support::{gap_neighborhood_probe, support_cover, ForcedCluster};
use brw_core::tree::{leaf_values, LabelOracle, LeafMode};
use brw_core::{Error, ParameterSet};

fn golden() -> ParameterSet {
    ParameterSet::bernoulli_exact("-1,-1,1".parse().unwrap()).unwrap()
}

#[test]
fn n0_and_maximal_values_match_full_enumeration() {
    let p = golden();
    let mut checked = 0;
    for seed in 0..300 {
        let o = LabelOracle::new(seed, p.clone());
        let r = gap_neighborhood_probe(&o, 1, 2, 12, 3).unwrap();
        let Some(n0) = r.n0 else { continue };
        checked += 1;
        assert!(!support_cover(&o, n0, true).unwrap().contains_point(0.5));
        if n0 > 0 {
            assert!(support_cover(&o, n0 - 1, true).unwrap().contains_point(0.5));
        }
        for (&(k, count), &(_, m)) in r.maximal_counts.iter().zip(&r.maximal_values) {
            let vals = leaf_values(&o, k, LeafMode::Full).unwrap();
            let best = vals
                .iter()
                .copied()
                .filter(|&x| x < 0.5)
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                let m = m.unwrap();
                assert!((m - best).abs() < 1e-12, "seed {seed} level {k}");
                let ties = vals.iter().filter(|&&x| (x - best).abs() < 1e-9).count();
                assert_eq!(ties, count, "seed {seed} level {k}");
            } else {
                assert_eq!(count, 0);
            }
        }
    }
    assert!(checked > 20, "only {checked} seeds left q outside S(12)");
}

#[test]
fn clusters_follow_maximal_vertices() {
    let p = golden();
    for seed in 0..400 {
        let o = LabelOracle::new(seed, p.clone());
        let r = gap_neighborhood_probe(&o, 1, 2, 24, 3).unwrap();
        for c in &r.clusters {
            assert!(c.matches_maximal, "seed {seed} n {}", c.n);
            if let Some(tau) = c.tau {
                assert!(tau >= c.n);
                assert_eq!(c.sizes.len(), tau - c.n + 1);
                assert!(c.sizes.iter().all(|&s| s >= 1));
            }
        }
        let ns: Vec<usize> = r.clusters.iter().map(|c| c.n).collect();
        assert!(ns.windows(2).all(|w| w[1] - w[0] == 4));
    }
}

#[test]
fn planted_events_always_show_the_gap() {
    let p = golden();
    let ell = 3;
    let mut planted = 0;
    for seed in 0..600 {
        let o = LabelOracle::new(seed, p.clone());
        let r = gap_neighborhood_probe(&o, 1, 2, 24, ell).unwrap();
        for c in &r.clusters {
            let (Some(tau), Some(w)) = (c.tau, c.last_vertex) else {
                continue;
            };
            if tau + 2 * ell + 5 > 70 {
                continue;
            }
            let f = ForcedCluster::new(&o, w, ell).unwrap();
            let r2 = gap_neighborhood_probe(&f, 1, 2, 24, ell).unwrap();
            assert_eq!(r2.n0, r.n0);
            let c2 = r2.clusters.iter().find(|x| x.n == c.n).unwrap();
            assert!(c2.event, "seed {seed} n {}", c.n);
            assert_eq!(c2.tau, Some(tau + ell + 1));
            let g = c2.gap.expect("gap expected after a planted event");
            assert!(g.level > tau + ell + 1 && g.level <= tau + 2 * ell + 5);
            assert!(g.lo < g.hi && g.hi < 0.5);
            planted += 1;
        }
    }
    assert!(planted > 100, "{planted}");
}

#[test]
fn planted_gap_is_a_gap_of_the_full_cover() {
    let p = golden();
    let ell = 3;
    for seed in 0..300 {
        let o = LabelOracle::new(seed, p.clone());
        let r = gap_neighborhood_probe(&o, 1, 2, 10, ell).unwrap();
        for c in &r.clusters {
            let (Some(tau), Some(w)) = (c.tau, c.last_vertex) else {
                continue;
            };
            // keep the witness level small enough for a full cover
            if tau + 2 * ell + 5 > 20 {
                continue;
            }
            let f = ForcedCluster::new(&o, w, ell).unwrap();
            let r2 = gap_neighborhood_probe(&f, 1, 2, 10, ell).unwrap();
            let c2 = r2.clusters.iter().find(|x| x.n == c.n).unwrap();
            let g = c2.gap.unwrap();
            let mid = 0.5 * (g.lo + g.hi);
            assert!(!support_cover(&f, g.level, true)
                .unwrap()
                .contains_point(mid));
            return;
        }
    }
    panic!("no shallow cluster found");
}

#[test]
fn probe_errors() {
    let o = LabelOracle::new(1, golden());
    assert!(matches!(
        gap_neighborhood_probe(&o, 5, 2, 10, 3),
        Err(Error::QOutsideHull { .. })
    ));
    let f = LabelOracle::new(1, ParameterSet::bernoulli(0.618).unwrap());
    assert!(matches!(
        gap_neighborhood_probe(&f, 1, 2, 10, 3),
        Err(Error::ExactModeUnavailable(_))
    ));
}
