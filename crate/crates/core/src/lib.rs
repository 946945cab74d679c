//! Temporal community detection with bounded estrangement.
//!
//! Each snapshot of an evolving weighted network is partitioned by maximizing
//! modularity subject to an upper bound `delta` on estrangement, the weighted
//! fraction of persisting intra-community edges that the new partition cuts.
//! The constrained problem is attacked through its Lagrange dual: label
//! propagation with a history term computes the dual function, and Brent's
//! method picks the multiplier. Labels are carried between snapshots by
//! mutual maximal Jaccard overlap.
//!
//! The main entry points are [`run_pipeline`] for whole series and
//! [`process_snapshot`] for online use.

pub mod api;
pub mod brent;
pub mod chart;
pub mod dual;
pub mod error;
pub mod graph;
pub mod history;
pub mod hlpa;
pub mod io;
pub mod mapping;
mod numeric;
pub mod pipeline;
pub mod quality;
pub mod sweep;
pub mod synthetic;

pub use chart::EvolutionChart;
pub use dual::{evaluate_dual, solve_dual, DualEvaluation, DualSolveResult, SolverConfig};
pub use error::{Error, Result};
pub use graph::{induce_graph, NodeHierarchyMap, NodeInterner, Partition, SnapshotGraph};
pub use history::{compute_history, induce_history, HistoryWeights};
pub use hlpa::{best_label, hlpa, lpa_converge, HlpaOutcome, RunConfig};
pub use io::{load_snapshots, parse_snapshots, parse_snapshots_with, SnapshotSeries};
pub use mapping::{map_labels, LabelRegistry, MappingOptions, OverlapGraph};
pub use pipeline::{
    process_snapshot, run_pipeline, PipelineConfig, PipelineState, ResultDocument, SnapshotDocument,
    SnapshotRecord, TemporalResult,
};
pub use quality::{estrangement, lagrangian, modularity, temporal_stability, QualityScores};
pub use sweep::{spearman, sweep, SweepRow};
pub use synthetic::{generate, planted_cohesion, HiddenGroupSpec, Phase};

pub use numeric::{compensated_sum, derive_seed};
