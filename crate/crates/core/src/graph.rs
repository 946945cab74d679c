//! Snapshot graphs, partitions and community contraction.
//!
//! A [`SnapshotGraph`] stores one weighted undirected time slice. Nodes are
//! addressed by dense local indices `0..n`; each local index also carries a
//! run-wide node id handed out by a [`NodeInterner`] so that snapshots with
//! different node universes can be lined up.
//!
//! Adjacency convention: `A_uv` for `u != v` is the edge weight, `A_uu` is the
//! self-loop weight (nonzero only on induced graphs, where it equals twice the
//! intra-community weight). The strength `k_u = A_uu + sum_{v != u} A_uv`
//! counts the diagonal once, so `sum_u k_u = 2M`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Bijection between external node tokens and run-wide integer ids.
#[derive(Debug, Clone, Default)]
pub struct NodeInterner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGraph {
    t: u64,
    node_ids: Vec<usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
    total_weight: f64,
}

impl SnapshotGraph {
    /// Builds an input graph over `node_ids.len()` local nodes.
    ///
    /// Duplicate edges are summed. Self-loops and nonpositive weights are
    /// rejected; `line` information is not available here so the error
    /// reports line 0.
    pub fn from_edges_with_ids<I>(t: u64, node_ids: Vec<usize>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = node_ids.len();
        let mut rows: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop on node {u}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) has nonpositive weight {w}"
                )));
            }
            *rows[u].entry(v).or_insert(0.0) += w;
            *rows[v].entry(u).or_insert(0.0) += w;
        }
        Ok(Self::from_rows(t, node_ids, rows, vec![0.0; n]))
    }

    /// Input graph with node ids `0..n` at `t = 0`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_edges_with_ids(0, (0..n).collect(), edges.iter().copied())
    }

    fn from_rows(
        t: u64,
        node_ids: Vec<usize>,
        rows: Vec<HashMap<usize, f64>>,
        self_loops: Vec<f64>,
    ) -> Self {
        let adjacency: Vec<Vec<(usize, f64)>> = rows
            .into_iter()
            .map(|row| {
                let mut row: Vec<(usize, f64)> = row.into_iter().collect();
                row.sort_unstable_by_key(|&(v, _)| v);
                row
            })
            .collect();
        let strength: Vec<f64> = adjacency
            .iter()
            .zip(&self_loops)
            .map(|(row, &a_uu)| a_uu + compensated_sum(row.iter().map(|&(_, w)| w)))
            .collect();
        let total_weight = 0.5 * compensated_sum(strength.iter().copied());
        Self {
            t,
            node_ids,
            adjacency,
            self_loops,
            strength,
            total_weight,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Run-wide ids of the local nodes.
    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    /// Local index for every run-wide id present in this snapshot.
    pub fn local_index(&self) -> HashMap<usize, usize> {
        self.node_ids
            .iter()
            .enumerate()
            .map(|(local, &id)| (id, local))
            .collect()
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn self_loop(&self, u: usize) -> f64 {
        self.self_loops[u]
    }

    pub fn strength(&self, u: usize) -> f64 {
        self.strength[u]
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strength
    }

    /// `M`, half the sum of all adjacency entries (diagonal counted once).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Off-diagonal weight `A_uv`, zero if absent.
    pub fn edge_weight(&self, u: usize, v: usize) -> f64 {
        let row = &self.adjacency[u];
        match row.binary_search_by_key(&v, |&(x, _)| x) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    /// Unordered off-diagonal edges `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn has_self_loops(&self) -> bool {
        self.self_loops.iter().any(|&w| w != 0.0)
    }
}

/// Total label assignment for the nodes of one graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn set(&mut self, u: usize, label: usize) {
        self.labels[u] = label;
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    /// Relabels to `0..c` in order of first appearance; returns the count `c`.
    pub fn compact(&self) -> (Partition, usize) {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        (Partition::new(labels), remap.len())
    }

    pub fn community_count(&self) -> usize {
        self.compact().1
    }

    /// Member lists in compact-label order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let (dense, count) = self.compact();
        let mut out = vec![Vec::new(); count];
        for (u, &c) in dense.labels.iter().enumerate() {
            out[c].push(u);
        }
        out
    }

    /// True when both partitions group nodes identically.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.len() == other.len() && self.compact().0 == other.compact().0
    }
}

/// For every contraction level, the original nodes each supernode stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeHierarchyMap {
    levels: Vec<Vec<Vec<usize>>>,
    original_count: usize,
}

impl NodeHierarchyMap {
    /// Level-0 map where every node is its own supernode.
    pub fn identity(n: usize) -> Self {
        Self {
            levels: vec![(0..n).map(|u| vec![u]).collect()],
            original_count: n,
        }
    }

    fn single(members: Vec<Vec<usize>>, original_count: usize) -> Self {
        Self {
            levels: vec![members],
            original_count,
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn original_count(&self) -> usize {
        self.original_count
    }

    pub fn level(&self, k: usize) -> &[Vec<usize>] {
        &self.levels[k]
    }

    /// Original nodes of supernode `s` at the deepest level.
    pub fn members(&self, s: usize) -> &[usize] {
        &self.levels[self.levels.len() - 1][s]
    }

    pub fn supernode_count(&self) -> usize {
        self.levels[self.levels.len() - 1].len()
    }

    /// Stacks `next` (whose nodes are this map's deepest supernodes) on top.
    pub fn then(&self, next: &NodeHierarchyMap) -> NodeHierarchyMap {
        let top = &self.levels[self.levels.len() - 1];
        let composed: Vec<Vec<usize>> = next.levels[next.levels.len() - 1]
            .iter()
            .map(|children| {
                let mut nodes: Vec<usize> = children
                    .iter()
                    .flat_map(|&c| top[c].iter().copied())
                    .collect();
                nodes.sort_unstable();
                nodes
            })
            .collect();
        let mut levels = self.levels.clone();
        levels.push(composed);
        NodeHierarchyMap {
            levels,
            original_count: self.original_count,
        }
    }

    /// Lifts a partition of the deepest supernodes to the original nodes.
    pub fn project(&self, p: &Partition) -> Partition {
        let mut labels = vec![usize::MAX; self.original_count];
        for (s, members) in self.levels[self.levels.len() - 1].iter().enumerate() {
            for &u in members {
                labels[u] = p.label(s);
            }
        }
        Partition::new(labels)
    }
}

/// Contracts every community of `p` into one supernode.
///
/// The supernode self-loop equals twice the intra-community weight (plus any
/// self-loops already present), and inter-supernode weights are the summed
/// weights between the two communities. Supernode `c` corresponds to compact
/// label `c` of `p`.
pub fn induce_graph(g: &SnapshotGraph, p: &Partition) -> (SnapshotGraph, NodeHierarchyMap) {
    assert_eq!(p.len(), g.node_count(), "partition does not cover the graph");
    let (dense, count) = p.compact();
    let mut rows: Vec<HashMap<usize, f64>> = vec![HashMap::new(); count];
    let mut self_loops = vec![0.0; count];
    for u in 0..g.node_count() {
        let cu = dense.label(u);
        self_loops[cu] += g.self_loop(u);
        for &(v, w) in g.neighbors(u) {
            let cv = dense.label(v);
            if cu == cv {
                // each intra edge is seen from both ends: contributes 2w in total
                self_loops[cu] += w;
            } else {
                *rows[cu].entry(cv).or_insert(0.0) += w;
            }
        }
    }
    let members = dense_members(&dense, count);
    let induced = SnapshotGraph::from_rows(g.t(), (0..count).collect(), rows, self_loops);
    (induced, NodeHierarchyMap::single(members, g.node_count()))
}

pub(crate) fn dense_members(dense: &Partition, count: usize) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); count];
    for (u, &c) in dense.labels().iter().enumerate() {
        members[c].push(u);
    }
    members
}
