//! Carrying community labels from one snapshot to the next.
//!
//! Communities at `t-1` and `t` form the two sides of a bipartite overlap
//! graph. Every community points to its maximal-Jaccard partner on the other
//! side; a community at `t` inherits a label only from a partner that points
//! back at it. All other communities at `t` get fresh labels.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::graph::Partition;

/// Monotone issuer of temporal community labels; labels are never reused.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRegistry {
    next: usize,
}

impl LabelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> usize {
        let l = self.next;
        self.next += 1;
        l
    }

    /// Number of labels issued so far.
    pub fn issued(&self) -> usize {
        self.next
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MappingOptions {
    /// Compute overlaps only over nodes present in both snapshots.
    pub common_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overlap {
    pub intersection: usize,
    pub union: usize,
}

impl Overlap {
    pub fn jaccard(&self) -> f64 {
        if self.union == 0 {
            0.0
        } else {
            self.intersection as f64 / self.union as f64
        }
    }

    /// Higher Jaccard first, then larger intersection. Exact rational compare.
    fn rank(&self, other: &Overlap) -> Ordering {
        let lhs = self.intersection as u128 * other.union as u128;
        let rhs = other.intersection as u128 * self.union as u128;
        lhs.cmp(&rhs)
            .then(self.intersection.cmp(&other.intersection))
    }
}

/// Bipartite maximal-overlap structure between two partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapGraph {
    /// Community labels at `t-1`, ascending.
    pub prev_labels: Vec<usize>,
    /// Raw community labels at `t`, ascending.
    pub cur_labels: Vec<usize>,
    /// Overlaps keyed by `(prev index, cur index)`, positive intersections only.
    pub overlaps: BTreeMap<(usize, usize), Overlap>,
    /// Maximal-overlap partner (cur index) of each previous community.
    pub prev_partner: Vec<Option<usize>>,
    /// Maximal-overlap partner (prev index) of each current community.
    pub cur_partner: Vec<Option<usize>>,
}

impl OverlapGraph {
    pub fn build(
        prev_nodes: &[usize],
        prev: &Partition,
        cur_nodes: &[usize],
        cur: &Partition,
        opts: MappingOptions,
    ) -> Self {
        assert_eq!(prev_nodes.len(), prev.len());
        assert_eq!(cur_nodes.len(), cur.len());
        let prev_of: HashMap<usize, usize> = prev_nodes
            .iter()
            .zip(prev.labels())
            .map(|(&id, &l)| (id, l))
            .collect();
        let cur_ids: std::collections::HashSet<usize> = cur_nodes.iter().copied().collect();

        let mut prev_size: BTreeMap<usize, usize> = BTreeMap::new();
        for (&id, &l) in prev_nodes.iter().zip(prev.labels()) {
            let counted = !opts.common_only || cur_ids.contains(&id);
            *prev_size.entry(l).or_insert(0) += counted as usize;
        }
        let mut cur_size: BTreeMap<usize, usize> = BTreeMap::new();
        let mut inter: HashMap<(usize, usize), usize> = HashMap::new();
        for (id, &l) in cur_nodes.iter().zip(cur.labels()) {
            let shared = prev_of.get(id);
            let counted = !opts.common_only || shared.is_some();
            *cur_size.entry(l).or_insert(0) += counted as usize;
            if let Some(&pl) = shared {
                *inter.entry((pl, l)).or_insert(0) += 1;
            }
        }

        let prev_labels: Vec<usize> = prev_size.keys().copied().collect();
        let cur_labels: Vec<usize> = cur_size.keys().copied().collect();
        let prev_index: HashMap<usize, usize> =
            prev_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let cur_index: HashMap<usize, usize> =
            cur_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();

        let overlaps: BTreeMap<(usize, usize), Overlap> = inter
            .into_iter()
            .map(|((pl, cl), i)| {
                let union = prev_size[&pl] + cur_size[&cl] - i;
                ((prev_index[&pl], cur_index[&cl]), Overlap { intersection: i, union })
            })
            .collect();

        let mut prev_partner: Vec<Option<(usize, Overlap)>> = vec![None; prev_labels.len()];
        let mut cur_partner: Vec<Option<(usize, Overlap)>> = vec![None; cur_labels.len()];
        // Keys ascend in both indices for a fixed counterpart, so a strict
        // improvement test keeps the smallest label among exact ties.
        for (&(pi, ci), ov) in &overlaps {
            if better(ov, &prev_partner[pi]) {
                prev_partner[pi] = Some((ci, *ov));
            }
        }
        for (&(pi, ci), ov) in &overlaps {
            if better(ov, &cur_partner[ci]) {
                cur_partner[ci] = Some((pi, *ov));
            }
        }

        Self {
            prev_labels,
            cur_labels,
            overlaps,
            prev_partner: prev_partner.into_iter().map(|p| p.map(|(c, _)| c)).collect(),
            cur_partner: cur_partner.into_iter().map(|p| p.map(|(c, _)| c)).collect(),
        }
    }

    pub fn jaccard(&self, prev_index: usize, cur_index: usize) -> f64 {
        self.overlaps
            .get(&(prev_index, cur_index))
            .map_or(0.0, Overlap::jaccard)
    }

    /// `(prev index, cur index)` pairs that are each other's partners.
    pub fn mutual_pairs(&self) -> Vec<(usize, usize)> {
        self.prev_partner
            .iter()
            .enumerate()
            .filter_map(|(pi, &ci)| {
                let ci = ci?;
                (self.cur_partner[ci] == Some(pi)).then_some((pi, ci))
            })
            .collect()
    }
}

fn better(candidate: &Overlap, incumbent: &Option<(usize, Overlap)>) -> bool {
    match incumbent {
        None => true,
        Some((_, best)) => candidate.rank(best) == Ordering::Greater,
    }
}

/// Relabels `cur_raw` so that mutual maximal-overlap partners keep the label
/// of their predecessor; every other community gets a fresh label from
/// `registry`, in ascending raw-label order.
pub fn map_labels(
    prev_nodes: &[usize],
    prev_mapped: &Partition,
    cur_nodes: &[usize],
    cur_raw: &Partition,
    registry: &mut LabelRegistry,
    opts: MappingOptions,
) -> Partition {
    let overlap = OverlapGraph::build(prev_nodes, prev_mapped, cur_nodes, cur_raw, opts);
    let mut assigned: Vec<Option<usize>> = vec![None; overlap.cur_labels.len()];
    for (pi, ci) in overlap.mutual_pairs() {
        assigned[ci] = Some(overlap.prev_labels[pi]);
    }
    let assigned: Vec<usize> = assigned
        .into_iter()
        .map(|a| a.unwrap_or_else(|| registry.fresh()))
        .collect();
    let by_raw: HashMap<usize, usize> = overlap
        .cur_labels
        .iter()
        .copied()
        .zip(assigned)
        .collect();
    Partition::new(cur_raw.labels().iter().map(|l| by_raw[l]).collect())
}

/// Fresh labels for a first snapshot, in ascending raw-label order.
pub fn fresh_labels(raw: &Partition, registry: &mut LabelRegistry) -> Partition {
    let mut distinct: Vec<usize> = raw.labels().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let by_raw: HashMap<usize, usize> = distinct.into_iter().map(|l| (l, registry.fresh())).collect();
    Partition::new(raw.labels().iter().map(|l| by_raw[l]).collect())
}
