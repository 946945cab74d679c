//! Partition scores: modularity, estrangement, the Lagrangian and temporal
//! stability.
//!
//! All pair sums use the ordered double sum divided by `2M`, which equals the
//! unordered-pair sum divided by `M`. `M` is always the total weight of the
//! graph being scored (the current snapshot).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Partition, SnapshotGraph};
use crate::history::HistoryWeights;
use crate::numeric::{compensated_sum, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub modularity: f64,
    pub estrangement: f64,
    pub lagrangian: f64,
    pub temporal_stability: f64,
}

fn total_weight(g: &SnapshotGraph) -> Result<f64> {
    let m = g.total_weight();
    if m > 0.0 {
        Ok(m)
    } else {
        Err(Error::EmptyGraph)
    }
}

fn check_cover(g: &SnapshotGraph, p: &Partition) {
    assert_eq!(p.len(), g.node_count(), "partition does not cover the graph");
}

/// Newman modularity in community-sum form, `sum_c [e_c/M - (K_c/2M)^2]`.
///
/// `e_c` counts each intra edge once and each self-loop as `A_uu / 2`.
pub fn modularity(g: &SnapshotGraph, p: &Partition) -> Result<f64> {
    let m = total_weight(g)?;
    check_cover(g, p);
    let (dense, count) = p.compact();
    let mut intra = vec![CompensatedSum::new(); count];
    let mut strength = vec![CompensatedSum::new(); count];
    for u in 0..g.node_count() {
        let c = dense.label(u);
        strength[c].add(g.strength(u));
        intra[c].add(0.5 * g.self_loop(u));
        for &(v, w) in g.neighbors(u) {
            if u < v && dense.label(v) == c {
                intra[c].add(w);
            }
        }
    }
    let two_m = 2.0 * m;
    Ok(compensated_sum(intra.iter().zip(&strength).map(|(e, k)| {
        let share = k.value() / two_m;
        e.value() / m - share * share
    })))
}

/// Modularity as the literal pairwise sum
/// `1/2M sum_{u,v} (A_uv - k_u k_v / 2M) delta(l_u, l_v)`.
///
/// Quadratic in community size; meant for cross-checking.
pub fn modularity_pairwise(g: &SnapshotGraph, p: &Partition) -> Result<f64> {
    let m = total_weight(g)?;
    check_cover(g, p);
    let two_m = 2.0 * m;
    let mut acc = CompensatedSum::new();
    for members in p.communities() {
        for &u in &members {
            for &v in &members {
                let a = if u == v { g.self_loop(u) } else { g.edge_weight(u, v) };
                acc.add(a - g.strength(u) * g.strength(v) / two_m);
            }
        }
    }
    Ok(acc.value() / two_m)
}

/// Z-weighted fraction of current edges whose endpoints were co-labeled at
/// `t-1` but are separated by `p`.
pub fn estrangement(g: &SnapshotGraph, z: &HistoryWeights, p: &Partition) -> Result<f64> {
    let m = total_weight(g)?;
    check_cover(g, p);
    let estranged = compensated_sum(
        z.pairs()
            .filter(|&(u, v, _)| p.label(u) != p.label(v))
            .map(|(_, _, w)| w),
    );
    Ok(estranged / m)
}

/// `Q - lambda * E`: the partition-dependent part of the Lagrangian, which is
/// what label propagation maximizes.
pub fn search_objective(
    g: &SnapshotGraph,
    z: &HistoryWeights,
    p: &Partition,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let q = modularity(g, p)?;
    if lambda == 0.0 {
        return Ok(q);
    }
    Ok(q - lambda * estrangement(g, z, p)?)
}

/// `L(P, lambda) = Q - lambda * (E - delta)`.
pub fn lagrangian(
    g: &SnapshotGraph,
    z: &HistoryWeights,
    p: &Partition,
    lambda: f64,
    delta: f64,
) -> Result<f64> {
    check_delta(delta)?;
    Ok(search_objective(g, z, p, lambda)? + lambda * delta)
}

/// Random-walk temporal stability
/// `sum_{uv} Z_uv delta(l_u,l_v) / 2M - sum_{uv} Z_uv / 2M`, which equals `-E`.
pub fn temporal_stability(g: &SnapshotGraph, z: &HistoryWeights, p: &Partition) -> Result<f64> {
    let m = total_weight(g)?;
    check_cover(g, p);
    let two_m = 2.0 * m;
    let mut retained = CompensatedSum::new();
    let mut total = CompensatedSum::new();
    for (u, v, w) in z.pairs() {
        // ordered double sum: each unordered pair appears twice
        total.add(2.0 * w);
        if p.label(u) == p.label(v) {
            retained.add(2.0 * w);
        }
    }
    Ok(retained.value() / two_m - total.value() / two_m)
}

pub fn scores(
    g: &SnapshotGraph,
    z: &HistoryWeights,
    p: &Partition,
    lambda: f64,
    delta: f64,
) -> Result<QualityScores> {
    check_lambda(lambda)?;
    check_delta(delta)?;
    let modularity = modularity(g, p)?;
    let estrangement = estrangement(g, z, p)?;
    Ok(QualityScores {
        modularity,
        estrangement,
        lagrangian: modularity - lambda * estrangement + lambda * delta,
        temporal_stability: temporal_stability(g, z, p)?,
    })
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )))
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1], got {delta}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{barbell6, two_triangles};
    use crate::graph::induce_graph;
    use crate::history::compute_history;

    const TOL: f64 = 1e-12;

    fn barbell_history() -> HistoryWeights {
        let g = barbell6();
        compute_history(&g, &two_triangles(), &g)
    }

    #[test]
    fn one_community_has_zero_modularity() {
        let g = barbell6();
        assert!(modularity(&g, &Partition::uniform(6)).unwrap().abs() < TOL);
    }

    #[test]
    fn barbell_modularity_values() {
        let g = barbell6();
        let q = modularity(&g, &two_triangles()).unwrap();
        assert!((q - 5.0 / 14.0).abs() < TOL);
        let q = modularity(&g, &Partition::singletons(6)).unwrap();
        assert!((q + 34.0 / 196.0).abs() < TOL);
    }

    #[test]
    fn forms_agree_on_induced_graph() {
        let g = barbell6();
        let (h, _) = induce_graph(&g, &Partition::new(vec![0, 0, 1, 2, 2, 2]));
        for p in [Partition::singletons(3), Partition::new(vec![0, 0, 1]), Partition::uniform(3)] {
            let a = modularity(&h, &p).unwrap();
            let b = modularity_pairwise(&h, &p).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = SnapshotGraph::from_edges(2, &[]).unwrap();
        assert!(matches!(modularity(&g, &Partition::uniform(2)), Err(Error::EmptyGraph)));
        let z = HistoryWeights::empty(2);
        assert!(matches!(estrangement(&g, &z, &Partition::uniform(2)), Err(Error::EmptyGraph)));
    }

    #[test]
    fn estrangement_values() {
        let g = barbell6();
        let z = barbell_history();
        assert_eq!(estrangement(&g, &z, &two_triangles()).unwrap(), 0.0);
        assert!((estrangement(&g, &z, &Partition::singletons(6)).unwrap() - 6.0 / 7.0).abs() < TOL);
        let split = Partition::new(vec![2, 0, 0, 1, 1, 1]);
        assert!((estrangement(&g, &z, &split).unwrap() - 2.0 / 7.0).abs() < TOL);
    }

    #[test]
    fn lagrangian_values() {
        let g = barbell6();
        let z = barbell_history();
        let single = Partition::singletons(6);
        let q = modularity(&g, &single).unwrap();
        assert_eq!(lagrangian(&g, &z, &single, 0.0, 0.7).unwrap(), q);
        let l = lagrangian(&g, &z, &two_triangles(), 1.0, 0.0).unwrap();
        assert!((l - 5.0 / 14.0).abs() < TOL);
        let l = lagrangian(&g, &z, &single, 1.0, 0.0).unwrap();
        assert!((l - (-34.0 / 196.0 - 6.0 / 7.0)).abs() < TOL);
        assert!(lagrangian(&g, &z, &single, -1.0, 0.0).is_err());
        assert!(lagrangian(&g, &z, &single, 1.0, 1.5).is_err());
    }

    #[test]
    fn lagrangian_is_affine_in_lambda() {
        let g = barbell6();
        let z = barbell_history();
        let p = Partition::new(vec![0, 1, 1, 2, 2, 2]);
        let delta = 0.1;
        let e = estrangement(&g, &z, &p).unwrap();
        let l0 = lagrangian(&g, &z, &p, 0.0, delta).unwrap();
        for lambda in [0.5, 1.0, 3.0, 10.0] {
            let l = lagrangian(&g, &z, &p, lambda, delta).unwrap();
            assert!((l - (l0 + lambda * (delta - e))).abs() < TOL);
        }
    }

    #[test]
    fn temporal_stability_is_negative_estrangement() {
        let g = barbell6();
        let z = barbell_history();
        assert_eq!(temporal_stability(&g, &HistoryWeights::empty(6), &two_triangles()).unwrap(), 0.0);
        let s = temporal_stability(&g, &z, &Partition::singletons(6)).unwrap();
        assert!((s + 6.0 / 7.0).abs() < 1e-15);
    }
}
