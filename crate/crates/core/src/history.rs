//! History weights `Z`: memory of which current edges were intra-community
//! in the previous snapshot.

use std::collections::HashMap;

use crate::graph::{dense_members, Partition, SnapshotGraph};
use crate::numeric::compensated_sum;

/// Sparse symmetric `Z` over the nodes of the current snapshot.
///
/// Off-diagonal entries follow the adjacency convention (one value per
/// unordered pair, stored in both rows). The diagonal only becomes nonzero
/// after contraction and then holds the ordered-pair sum of the contracted
/// community, mirroring the adjacency self-loop convention.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryWeights {
    prev_t: Option<u64>,
    rows: Vec<Vec<(usize, f64)>>,
    diagonal: Vec<f64>,
    prior_labels: Vec<Option<usize>>,
}

impl HistoryWeights {
    /// No history over `n` nodes.
    pub fn empty(n: usize) -> Self {
        Self {
            prev_t: None,
            rows: vec![Vec::new(); n],
            diagonal: vec![0.0; n],
            prior_labels: Vec::new(),
        }
    }

    /// Builds `Z` from explicit unordered pairs; duplicates are summed and
    /// nonpositive values dropped.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Self {
        let mut acc: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        for &(u, v, z) in pairs {
            assert!(u != v && u < n && v < n, "invalid history pair ({u}, {v})");
            if z > 0.0 {
                *acc[u].entry(v).or_insert(0.0) += z;
                *acc[v].entry(u).or_insert(0.0) += z;
            }
        }
        Self {
            rows: sorted_rows(acc),
            ..Self::empty(n)
        }
    }

    pub fn with_prior_labels(mut self, prior: Vec<Option<usize>>) -> Self {
        assert_eq!(prior.len(), self.rows.len());
        self.prior_labels = prior;
        self
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// Timestamp of the snapshot this history was computed from.
    pub fn prev_t(&self) -> Option<u64> {
        self.prev_t
    }

    /// Nodes `u != x` with `Z_ux > 0`.
    pub fn partners(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn diagonal(&self, x: usize) -> f64 {
        self.diagonal[x]
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return self.diagonal[u];
        }
        let row = &self.rows[u];
        match row.binary_search_by_key(&v, |&(x, _)| x) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    /// Unordered off-diagonal pairs `(u, v, Z_uv)` with `u < v`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, z)| (u, v, z))
        })
    }

    /// Sum of `Z_uv` over unordered off-diagonal pairs.
    pub fn pair_total(&self) -> f64 {
        compensated_sum(self.pairs().map(|(_, _, z)| z))
    }

    /// True when no off-diagonal pair carries history.
    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    /// Label each current node had in the previous snapshot, if it existed.
    /// Empty on contracted histories.
    pub fn prior_labels(&self) -> &[Option<usize>] {
        &self.prior_labels
    }
}

fn sorted_rows(acc: Vec<HashMap<usize, f64>>) -> Vec<Vec<(usize, f64)>> {
    acc.into_iter()
        .map(|row| {
            let mut row: Vec<(usize, f64)> = row.into_iter().collect();
            row.sort_unstable_by_key(|&(v, _)| v);
            row
        })
        .collect()
}

/// `Z_uv = sqrt(A^{t-1}_uv * A^t_uv)` on edges present in both snapshots whose
/// endpoints shared a label at `t-1`; absent everywhere else.
pub fn compute_history(
    g_prev: &SnapshotGraph,
    p_prev: &Partition,
    g_cur: &SnapshotGraph,
) -> HistoryWeights {
    assert_eq!(p_prev.len(), g_prev.node_count(), "partition does not cover the graph");
    let prev_local = g_prev.local_index();
    let to_prev: Vec<Option<usize>> = g_cur
        .node_ids()
        .iter()
        .map(|id| prev_local.get(id).copied())
        .collect();
    let mut acc: Vec<HashMap<usize, f64>> = vec![HashMap::new(); g_cur.node_count()];
    for (u, v, w_cur) in g_cur.edges() {
        let (Some(pu), Some(pv)) = (to_prev[u], to_prev[v]) else {
            continue;
        };
        if p_prev.label(pu) != p_prev.label(pv) {
            continue;
        }
        let w_prev = g_prev.edge_weight(pu, pv);
        if w_prev > 0.0 {
            let z = (w_prev * w_cur).sqrt();
            acc[u].insert(v, z);
            acc[v].insert(u, z);
        }
    }
    let n = g_cur.node_count();
    HistoryWeights {
        prev_t: Some(g_prev.t()),
        rows: sorted_rows(acc),
        diagonal: vec![0.0; n],
        prior_labels: to_prev
            .iter()
            .map(|pu| pu.map(|pu| p_prev.label(pu)))
            .collect(),
    }
}

/// Aggregates `Z` onto the supernodes of `p` (supernode `c` = compact label `c`).
///
/// Off-diagonal `Z_cd` sums `Z_ij` over `i in c, j in d`; the diagonal `Z_cc`
/// sums `Z_ij` over ordered pairs inside `c`.
pub fn induce_history(z: &HistoryWeights, p: &Partition) -> HistoryWeights {
    assert_eq!(p.len(), z.node_count(), "partition does not cover the history");
    let (dense, count) = p.compact();
    let mut acc: Vec<HashMap<usize, f64>> = vec![HashMap::new(); count];
    let mut diagonal = vec![0.0; count];
    for (c, members) in dense_members(&dense, count).iter().enumerate() {
        for &i in members {
            diagonal[c] += z.diagonal(i);
            for &(j, w) in z.partners(i) {
                let d = dense.label(j);
                if c == d {
                    diagonal[c] += w;
                } else {
                    *acc[c].entry(d).or_insert(0.0) += w;
                }
            }
        }
    }
    HistoryWeights {
        prev_t: z.prev_t,
        rows: sorted_rows(acc),
        diagonal,
        prior_labels: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{barbell6, two_triangles};

    #[test]
    fn barbell_history_marks_triangle_edges() {
        let g = barbell6();
        let z = compute_history(&g, &two_triangles(), &g);
        assert_eq!(z.pairs().count(), 6);
        for (u, v, w) in z.pairs() {
            assert_eq!(w, 1.0);
            assert_eq!(u < 3, v < 3);
        }
        assert_eq!(z.weight(2, 3), 0.0);
        assert_eq!(z.prev_t(), Some(0));
        assert_eq!(z.prior_labels(), &[Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]);
    }

    #[test]
    fn singleton_history_is_empty() {
        let g = barbell6();
        let z = compute_history(&g, &Partition::singletons(6), &g);
        assert!(z.is_empty());
    }

    #[test]
    fn weighted_history_is_geometric_mean() {
        let prev = SnapshotGraph::from_edges(2, &[(0, 1, 4.0)]).unwrap();
        let cur = SnapshotGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let z = compute_history(&prev, &Partition::uniform(2), &cur);
        assert_eq!(z.weight(0, 1), 2.0);
        assert_eq!(z.weight(1, 0), 2.0);
    }

    #[test]
    fn history_follows_node_ids_across_universes() {
        // prev: ids 10-11-12 path, cur: ids 12, 11, 13 with edges 12-11, 11-13
        let prev = SnapshotGraph::from_edges_with_ids(
            0,
            vec![10, 11, 12],
            [(0, 1, 1.0), (1, 2, 9.0)],
        )
        .unwrap();
        let cur =
            SnapshotGraph::from_edges_with_ids(1, vec![12, 11, 13], [(0, 1, 1.0), (1, 2, 1.0)])
                .unwrap();
        let z = compute_history(&prev, &Partition::uniform(3), &cur);
        assert_eq!(z.pairs().collect::<Vec<_>>(), vec![(0, 1, 3.0)]);
        assert_eq!(z.prior_labels(), &[Some(0), Some(0), None]);
    }

    #[test]
    fn induce_history_aggregates() {
        let g = barbell6();
        let z = compute_history(&g, &two_triangles(), &g);
        let zi = induce_history(&z, &two_triangles());
        assert_eq!(zi.node_count(), 2);
        assert_eq!(zi.diagonal(0), 6.0);
        assert_eq!(zi.diagonal(1), 6.0);
        assert_eq!(zi.weight(0, 1), 0.0);
        assert!(zi.is_empty());
    }

    #[test]
    fn induce_history_identity_and_zero() {
        let g = barbell6();
        let z = compute_history(&g, &two_triangles(), &g);
        let same = induce_history(&z, &Partition::singletons(6));
        assert_eq!(same.pairs().collect::<Vec<_>>(), z.pairs().collect::<Vec<_>>());
        let empty = induce_history(&HistoryWeights::empty(6), &two_triangles());
        assert!(empty.is_empty());
        assert_eq!(empty.diagonal(0), 0.0);
    }

    #[test]
    fn induce_history_cross_pairs() {
        let z = HistoryWeights::from_pairs(4, &[(0, 2, 1.0), (1, 3, 2.0), (0, 1, 0.5)]);
        let zi = induce_history(&z, &Partition::new(vec![0, 0, 1, 1]));
        assert_eq!(zi.weight(0, 1), 3.0);
        assert_eq!(zi.diagonal(0), 1.0);
        assert_eq!(zi.diagonal(1), 0.0);
    }
}
