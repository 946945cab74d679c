//! Online temporal community detection: one constrained solve per snapshot,
//! followed by label mapping against the previous snapshot.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dual::{solve_dual, solve_unconstrained, DualSolveResult, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{NodeInterner, Partition, SnapshotGraph};
use crate::history::{compute_history, HistoryWeights};
use crate::mapping::{fresh_labels, map_labels, LabelRegistry, MappingOptions};
use crate::numeric::derive_seed;
use crate::quality::check_delta;

/// Modularity loss below this is reported as sampling noise.
pub const NEGATIVE_LOSS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub solver: SolverConfig,
    /// Also solve every snapshot without the estrangement bound.
    pub report_loss: bool,
    pub jaccard_common_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub t: u64,
    /// Run-wide node ids, aligned with `partition`.
    pub node_ids: Vec<usize>,
    /// Temporal labels after mapping.
    pub partition: Partition,
    pub lambda_star: f64,
    pub final_lambda: f64,
    pub q: f64,
    pub e: f64,
    pub q_unconstrained: Option<f64>,
    pub fallback: bool,
}

impl SnapshotRecord {
    pub fn loss(&self) -> Option<f64> {
        self.q_unconstrained.map(|qu| qu - self.q)
    }
}

/// What the online driver carries from one snapshot to the next: the
/// previous graph, its mapped partition and the label registry.
#[derive(Debug, Clone, Default)]
pub struct PipelineState {
    prev: Option<(SnapshotGraph, Partition)>,
    registry: LabelRegistry,
}

impl PipelineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn previous(&self) -> Option<(&SnapshotGraph, &Partition)> {
        self.prev.as_ref().map(|(g, p)| (g, p))
    }

    pub fn registry(&self) -> LabelRegistry {
        self.registry
    }
}

fn snapshot_solver(cfg: &PipelineConfig, t: u64) -> SolverConfig {
    SolverConfig {
        seed: derive_seed(cfg.solver.seed, &[t]),
        ..cfg.solver
    }
}

/// Solves one snapshot against the carried state and returns the record
/// together with the successor state.
pub fn process_snapshot(
    state: PipelineState,
    g: &SnapshotGraph,
    delta: f64,
    cfg: &PipelineConfig,
) -> Result<(SnapshotRecord, PipelineState)> {
    check_delta(delta)?;
    if g.total_weight() <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let solver = snapshot_solver(cfg, g.t());
    let PipelineState { prev, mut registry } = state;

    let (solved, mapped): (DualSolveResult, Partition) = match &prev {
        None => {
            let res = solve_unconstrained(g, &HistoryWeights::empty(g.node_count()), delta, &solver)?;
            let mapped = fresh_labels(&res.partition, &mut registry);
            (res, mapped)
        }
        Some((g_prev, p_prev)) => {
            let z = compute_history(g_prev, p_prev, g);
            let res = if z.is_empty() {
                tracing::info!(t = g.t(), "no surviving co-labeled edges; solving unconstrained");
                solve_unconstrained(g, &z, delta, &solver)?
            } else {
                solve_dual(g, &z, delta, &solver)?
            };
            let mapped = map_labels(
                g_prev.node_ids(),
                p_prev,
                g.node_ids(),
                &res.partition,
                &mut registry,
                MappingOptions {
                    common_only: cfg.jaccard_common_only,
                },
            );
            (res, mapped)
        }
    };

    let q_unconstrained = if !cfg.report_loss {
        None
    } else if solved.lambda_star == 0.0 && solved.trace.len() == 1 {
        // already the unconstrained solve
        Some(solved.q)
    } else {
        let free = solve_unconstrained(g, &HistoryWeights::empty(g.node_count()), delta, &solver)?;
        Some(free.q)
    };

    let record = SnapshotRecord {
        t: g.t(),
        node_ids: g.node_ids().to_vec(),
        partition: mapped.clone(),
        lambda_star: solved.lambda_star,
        final_lambda: solved.final_lambda,
        q: solved.q,
        e: if prev.is_some() { solved.e } else { 0.0 },
        q_unconstrained,
        fallback: solved.feasibility_fallback_used,
    };
    if let Some(loss) = record.loss() {
        if loss < -NEGATIVE_LOSS_TOLERANCE {
            tracing::warn!(t = record.t, loss, "constrained solve beat the unconstrained one");
        }
    }
    let next = PipelineState {
        prev: Some((g.clone(), mapped)),
        registry,
    };
    Ok((record, next))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalResult {
    pub delta: f64,
    pub seed: u64,
    pub records: Vec<SnapshotRecord>,
    /// Total number of temporal labels ever issued.
    pub labels_issued: usize,
}

impl TemporalResult {
    pub fn mean_estrangement(&self) -> f64 {
        mean(self.records.iter().map(|r| r.e))
    }

    /// Mean of `Q_unconstrained - Q`, if losses were recorded.
    pub fn mean_loss(&self) -> Option<f64> {
        let losses: Option<Vec<f64>> = self.records.iter().map(SnapshotRecord::loss).collect();
        losses.map(|l| mean(l.into_iter()))
    }

    pub fn to_document(&self, interner: &NodeInterner) -> ResultDocument {
        ResultDocument {
            delta: self.delta,
            seed: self.seed,
            snapshots: self
                .records
                .iter()
                .map(|r| SnapshotDocument::from_record(r, interner))
                .collect(),
        }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Folds [`process_snapshot`] over the series in order.
pub fn run_pipeline(
    snapshots: &[SnapshotGraph],
    delta: f64,
    cfg: &PipelineConfig,
) -> Result<TemporalResult> {
    check_delta(delta)?;
    if snapshots.is_empty() {
        return Err(Error::InvalidParameter("no snapshots to process".into()));
    }
    let mut state = PipelineState::new();
    let mut records = Vec::with_capacity(snapshots.len());
    for g in snapshots {
        let (record, next) = process_snapshot(state, g, delta, cfg)?;
        records.push(record);
        state = next;
    }
    Ok(TemporalResult {
        delta,
        seed: cfg.solver.seed,
        records,
        labels_issued: state.registry.issued(),
    })
}

/// Serialized pipeline output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub delta: f64,
    pub seed: u64,
    pub snapshots: Vec<SnapshotDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDocument {
    pub t: u64,
    pub lambda_star: f64,
    pub final_lambda: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_unconstrained: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub loss_flagged: bool,
    pub fallback: bool,
    pub labels: BTreeMap<String, usize>,
}

impl SnapshotDocument {
    pub fn from_record(r: &SnapshotRecord, interner: &NodeInterner) -> Self {
        let loss = r.loss();
        Self {
            t: r.t,
            lambda_star: r.lambda_star,
            final_lambda: r.final_lambda,
            q: r.q,
            e: r.e,
            q_unconstrained: r.q_unconstrained,
            loss,
            loss_flagged: loss.is_some_and(|l| l < -NEGATIVE_LOSS_TOLERANCE),
            fallback: r.fallback,
            labels: r
                .node_ids
                .iter()
                .zip(r.partition.labels())
                .map(|(&id, &l)| (interner.name(id).to_owned(), l))
                .collect(),
        }
    }
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result document serializes")
    }
}
