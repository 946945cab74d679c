//! Evolving random networks with planted hidden groups.
//!
//! Every snapshot is an independent `G(n, m)` background graph plus a fixed
//! number of extra edges among the members of whichever group is active at
//! that time. The extra edges are drawn uniformly from the member pairs not
//! already used by the background, so edge counts are exact.

use std::collections::HashSet;
use std::ops::Range;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeInterner, SnapshotGraph};
use crate::io::SnapshotSeries;
use crate::numeric::derive_seed;
use crate::pipeline::ResultDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    /// Snapshots `start..end` (end exclusive).
    pub snapshots: Range<u64>,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HiddenGroupSpec {
    pub n_nodes: usize,
    pub m_background: usize,
    pub m_extra: usize,
    pub phases: Vec<Phase>,
    pub n_snapshots: u64,
    pub seed: u64,
}

impl Default for HiddenGroupSpec {
    /// 40 nodes, 80 background edges, 20 extra edges; nodes 0-9 form the
    /// group for the first 20 snapshots and nodes 9-19 for the last 20.
    fn default() -> Self {
        Self {
            n_nodes: 40,
            m_background: 80,
            m_extra: 20,
            phases: vec![
                Phase {
                    snapshots: 0..20,
                    members: (0..10).collect(),
                },
                Phase {
                    snapshots: 20..40,
                    members: (9..20).collect(),
                },
            ],
            n_snapshots: 40,
            seed: 0,
        }
    }
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Maps `k` in `0..n(n-1)/2` to the k-th pair `(u, v)`, `u < v`, in row order.
fn decode_pair(mut k: usize, n: usize) -> (usize, usize) {
    let mut u = 0;
    loop {
        let row = n - 1 - u;
        if k < row {
            return (u, u + 1 + k);
        }
        k -= row;
        u += 1;
    }
}

impl HiddenGroupSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n_nodes < 2 {
            return bad(format!("need at least 2 nodes, got {}", self.n_nodes));
        }
        if self.m_background + self.m_extra == 0 {
            return bad("snapshots would have no edges".into());
        }
        if self.m_background > pair_count(self.n_nodes) {
            return bad(format!(
                "{} background edges do not fit on {} nodes",
                self.m_background, self.n_nodes
            ));
        }
        let mut covered = vec![false; self.n_snapshots as usize];
        for (i, phase) in self.phases.iter().enumerate() {
            if phase.snapshots.end > self.n_snapshots || phase.snapshots.is_empty() {
                return bad(format!("phase {i} range {:?} is empty or out of bounds", phase.snapshots));
            }
            if let Some(&u) = phase.members.iter().find(|&&u| u >= self.n_nodes) {
                return bad(format!("phase {i} member {u} is not a node"));
            }
            let distinct: HashSet<_> = phase.members.iter().collect();
            if distinct.len() != phase.members.len() {
                return bad(format!("phase {i} lists a member twice"));
            }
            if pair_count(phase.members.len()) < self.m_extra {
                return bad(format!(
                    "phase {i} has {} member pairs, fewer than {} extra edges",
                    pair_count(phase.members.len()),
                    self.m_extra
                ));
            }
            for t in phase.snapshots.clone() {
                if std::mem::replace(&mut covered[t as usize], true) {
                    return bad(format!("snapshot {t} is covered by two phases"));
                }
            }
        }
        if self.m_extra > 0 {
            if let Some(t) = covered.iter().position(|c| !c) {
                return bad(format!("snapshot {t} has no active phase"));
            }
        }
        Ok(())
    }

    pub fn active_phase(&self, t: u64) -> Option<&Phase> {
        self.phases.iter().find(|p| p.snapshots.contains(&t))
    }
}

/// Generates the snapshot sequence. Node `i` is named `"i"`.
pub fn generate(spec: &HiddenGroupSpec) -> Result<SnapshotSeries> {
    spec.validate()?;
    let n = spec.n_nodes;
    let mut interner = NodeInterner::new();
    for i in 0..n {
        interner.intern(&i.to_string());
    }
    let mut graphs = Vec::with_capacity(spec.n_snapshots as usize);
    for t in 0..spec.n_snapshots {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[t]));
        let mut edges: HashSet<(usize, usize)> = index::sample(&mut rng, pair_count(n), spec.m_background)
            .into_iter()
            .map(|k| decode_pair(k, n))
            .collect();

        if spec.m_extra > 0 {
            let phase = spec.active_phase(t).expect("validated coverage");
            let mut members = phase.members.clone();
            members.sort_unstable();
            let free: Vec<(usize, usize)> = members
                .iter()
                .enumerate()
                .flat_map(|(i, &u)| members[i + 1..].iter().map(move |&v| (u, v)))
                .filter(|pair| !edges.contains(pair))
                .collect();
            if free.len() < spec.m_extra {
                return Err(Error::InvalidSpec(format!(
                    "snapshot {t}: only {} free member pairs for {} extra edges",
                    free.len(),
                    spec.m_extra
                )));
            }
            for k in index::sample(&mut rng, free.len(), spec.m_extra) {
                edges.insert(free[k]);
            }
        }

        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        edges.sort_unstable();
        let mut local = vec![usize::MAX; n];
        let mut node_ids = Vec::new();
        let mut local_edges = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            for x in [u, v] {
                if local[x] == usize::MAX {
                    local[x] = node_ids.len();
                    node_ids.push(x);
                }
            }
            local_edges.push((local[u], local[v], 1.0));
        }
        graphs.push(SnapshotGraph::from_edges_with_ids(t, node_ids, local_edges)?);
    }
    Ok(SnapshotSeries { interner, graphs })
}

/// Mean co-labeling rate of each phase's members over the phase's snapshots.
///
/// For one snapshot the rate is the fraction of member pairs that share a
/// label; members absent from the snapshot share nothing.
pub fn planted_cohesion(result: &ResultDocument, spec: &HiddenGroupSpec) -> Result<Vec<f64>> {
    spec.phases
        .iter()
        .map(|phase| {
            let names: Vec<String> = phase.members.iter().map(|u| u.to_string()).collect();
            let pairs = pair_count(names.len());
            let mut rates = Vec::new();
            for t in phase.snapshots.clone() {
                let snap = result
                    .snapshots
                    .iter()
                    .find(|s| s.t == t)
                    .ok_or_else(|| Error::InvalidParameter(format!("result has no snapshot {t}")))?;
                let labels: Vec<Option<usize>> =
                    names.iter().map(|n| snap.labels.get(n).copied()).collect();
                let mut shared = 0usize;
                for i in 0..labels.len() {
                    for j in i + 1..labels.len() {
                        if labels[i].is_some() && labels[i] == labels[j] {
                            shared += 1;
                        }
                    }
                }
                rates.push(if pairs == 0 { 1.0 } else { shared as f64 / pairs as f64 });
            }
            Ok(rates.iter().sum::<f64>() / rates.len() as f64)
        })
        .collect()
}
