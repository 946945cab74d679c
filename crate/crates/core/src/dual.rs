//! Lagrange dual of the estrangement-constrained modularity problem.
//!
//! `g(lambda) = sup_P Q(P) - lambda (E(P) - delta)` is estimated as the best of
//! several independent [`hlpa`] runs and minimized over `[0, lambda_max]` with
//! Brent's bounded method. The partition selected at the minimizer is then
//! pushed into the feasible region `E <= delta` by inflating `lambda`, with a
//! history-preserving fallback as last resort.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brent::{minimize_bounded, BrentOptions};
use crate::error::{Error, Result};
use crate::graph::{Partition, SnapshotGraph};
use crate::history::HistoryWeights;
use crate::hlpa::{hlpa, RunConfig};
use crate::numeric::derive_seed;
use crate::quality::{check_delta, check_lambda, estrangement, modularity};

/// Slack on `E <= delta` when deciding feasibility.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub lambda_max: f64,
    /// Brent tolerance on lambda.
    pub xtol: f64,
    /// Runs for the first Brent evaluation.
    pub min_runs: usize,
    /// Extra runs added per Brent iteration.
    pub run_increment: usize,
    /// Cap on runs for any Brent evaluation.
    pub max_runs: usize,
    /// Runs for the confirmation evaluation at the minimizer and beyond.
    pub final_runs: usize,
    /// Geometric growth factor used to push lambda into the feasible region.
    pub inflation: f64,
    pub max_inflation_steps: usize,
    pub seed: u64,
    pub run: RunConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_max: 10.0,
            xtol: 1e-2,
            min_runs: 10,
            run_increment: 10,
            max_runs: 200,
            final_runs: 150,
            inflation: 0.1,
            max_inflation_steps: 50,
            seed: 0,
            run: RunConfig::default(),
        }
    }
}

impl SolverConfig {
    /// Runs for Brent iteration `i`: `min_runs + i * run_increment`, capped.
    pub fn runs_for_iteration(&self, i: usize) -> usize {
        (self.min_runs + i * self.run_increment).min(self.max_runs).max(1)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_owned()));
        if !(self.lambda_max > 0.0 && self.lambda_max.is_finite()) {
            return bad("lambda_max must be positive");
        }
        if self.xtol.is_nan() || self.xtol <= 0.0 {
            return bad("xtol must be positive");
        }
        if self.min_runs == 0 || self.max_runs == 0 || self.final_runs == 0 {
            return bad("run counts must be at least 1");
        }
        if self.inflation.is_nan() || self.inflation <= 0.0 {
            return bad("inflation factor must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualEvaluation {
    pub lambda: f64,
    pub g_value: f64,
    pub best_partition: Partition,
    pub best_q: f64,
    pub best_e: f64,
    pub runs_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolveResult {
    pub lambda_star: f64,
    pub final_lambda: f64,
    pub partition: Partition,
    pub q: f64,
    pub e: f64,
    pub trace: Vec<DualEvaluation>,
    pub feasibility_fallback_used: bool,
}

struct RunOutcome {
    partition: Partition,
    q: f64,
    e: f64,
}

/// Best-of-`n_runs` estimate of `g(lambda)`.
///
/// Run `i` uses a seed derived from `(base_seed, lambda, i)`, so a larger
/// `n_runs` explores a superset of the partitions a smaller one does. Ties in
/// the Lagrangian go to the lower estrangement, then the lower run index.
pub fn evaluate_dual(
    lambda: f64,
    g: &SnapshotGraph,
    z: &HistoryWeights,
    delta: f64,
    n_runs: usize,
    base_seed: u64,
    run: &RunConfig,
) -> Result<DualEvaluation> {
    check_lambda(lambda)?;
    check_delta(delta)?;
    if n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
    }
    let outcomes: Vec<RunOutcome> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let cfg = RunConfig {
                seed: derive_seed(base_seed, &[lambda.to_bits(), i as u64]),
                ..*run
            };
            let out = hlpa(g, z, lambda, &cfg)?;
            let q = modularity(g, &out.partition)?;
            let e = estrangement(g, z, &out.partition)?;
            Ok(RunOutcome {
                partition: out.partition,
                q,
                e,
            })
        })
        .collect::<Result<_>>()?;

    let lagrangian = |o: &RunOutcome| o.q - lambda * o.e + lambda * delta;
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        let (lo, lb) = (lagrangian(o), lagrangian(&outcomes[best]));
        if lo > lb || (lo == lb && o.e < outcomes[best].e) {
            best = i;
        }
    }
    let chosen = outcomes.into_iter().nth(best).expect("at least one run");
    Ok(DualEvaluation {
        lambda,
        g_value: lagrangian(&chosen),
        best_partition: chosen.partition,
        best_q: chosen.q,
        best_e: chosen.e,
        runs_used: n_runs,
    })
}

fn is_feasible(e: f64, delta: f64) -> bool {
    e <= delta + FEASIBILITY_SLACK
}

/// Unconstrained best-of-`final_runs` solve at `lambda = 0`.
pub fn solve_unconstrained(
    g: &SnapshotGraph,
    z: &HistoryWeights,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<DualSolveResult> {
    cfg.validate()?;
    let eval = evaluate_dual(0.0, g, &HistoryWeights::empty(g.node_count()), delta, cfg.final_runs, cfg.seed, &cfg.run)?;
    let e = estrangement(g, z, &eval.best_partition)?;
    Ok(DualSolveResult {
        lambda_star: 0.0,
        final_lambda: 0.0,
        partition: eval.best_partition.clone(),
        q: eval.best_q,
        e,
        trace: vec![eval],
        feasibility_fallback_used: false,
    })
}

/// Partition with `E = 0`: nodes carried over from the previous snapshot keep
/// their previous labels, new nodes become singletons. Without prior labels
/// the connected components of the history graph are used instead.
pub fn history_preserving_partition(z: &HistoryWeights) -> Partition {
    let n = z.node_count();
    if z.prior_labels().len() == n {
        let offset = z.prior_labels().iter().flatten().max().map_or(0, |&m| m + 1);
        let labels = z
            .prior_labels()
            .iter()
            .enumerate()
            .map(|(u, l)| l.unwrap_or(offset + u))
            .collect();
        return Partition::new(labels).compact().0;
    }
    let mut labels = vec![usize::MAX; n];
    for root in 0..n {
        if labels[root] != usize::MAX {
            continue;
        }
        labels[root] = root;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &(v, _) in z.partners(u) {
                if labels[v] == usize::MAX {
                    labels[v] = root;
                    stack.push(v);
                }
            }
        }
    }
    Partition::new(labels).compact().0
}

/// Solves `max Q s.t. E <= delta` through its Lagrange dual.
///
/// When the history cannot violate the bound for any partition
/// (`sum Z / M <= delta`, including empty history) this reduces to
/// [`solve_unconstrained`].
pub fn solve_dual(
    g: &SnapshotGraph,
    z: &HistoryWeights,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<DualSolveResult> {
    check_delta(delta)?;
    cfg.validate()?;
    let m = g.total_weight();
    if m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    if z.is_empty() || z.pair_total() / m <= delta {
        return solve_unconstrained(g, z, delta, cfg);
    }

    let mut trace: Vec<DualEvaluation> = Vec::new();
    let brent = minimize_bounded(
        |lambda, iteration| {
            if let Some(hit) = trace.iter().find(|e| e.lambda.to_bits() == lambda.to_bits()) {
                return Ok(hit.g_value);
            }
            let runs = cfg.runs_for_iteration(iteration);
            let eval = evaluate_dual(lambda, g, z, delta, runs, cfg.seed, &cfg.run)?;
            let value = eval.g_value;
            trace.push(eval);
            Ok::<_, Error>(value)
        },
        0.0,
        cfg.lambda_max,
        BrentOptions {
            xtol: cfg.xtol,
            ..BrentOptions::default()
        },
    )?;
    let lambda_star = brent.x;
    let final_runs = cfg.final_runs;

    let confirm = evaluate_dual(lambda_star, g, z, delta, final_runs, cfg.seed, &cfg.run)?;
    trace.push(confirm.clone());
    if is_feasible(confirm.best_e, delta) {
        return Ok(DualSolveResult {
            lambda_star,
            final_lambda: lambda_star,
            partition: confirm.best_partition,
            q: confirm.best_q,
            e: confirm.best_e,
            trace,
            feasibility_fallback_used: false,
        });
    }

    // Step lambda up geometrically until the selected partition is feasible.
    let base = lambda_star.max(cfg.xtol);
    let mut candidates: Vec<f64> = (1..=cfg.max_inflation_steps)
        .map(|k| (base * (1.0 + cfg.inflation).powi(k as i32)).min(cfg.lambda_max))
        .take_while(|&l| l < cfg.lambda_max)
        .collect();
    candidates.push(cfg.lambda_max);
    for lambda in candidates {
        let eval = evaluate_dual(lambda, g, z, delta, final_runs, cfg.seed, &cfg.run)?;
        trace.push(eval.clone());
        if is_feasible(eval.best_e, delta) {
            return Ok(DualSolveResult {
                lambda_star,
                final_lambda: lambda,
                partition: eval.best_partition,
                q: eval.best_q,
                e: eval.best_e,
                trace,
                feasibility_fallback_used: false,
            });
        }
    }

    tracing::debug!(lambda_star, "no feasible partition up to lambda_max, using history fallback");
    let partition = history_preserving_partition(z);
    Ok(DualSolveResult {
        lambda_star,
        final_lambda: cfg.lambda_max,
        q: modularity(g, &partition)?,
        e: estrangement(g, z, &partition)?,
        partition,
        trace,
        feasibility_fallback_used: true,
    })
}
