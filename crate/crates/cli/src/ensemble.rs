//! Replica-level parallel ensemble execution.
//!
//! Replica `i` always runs with `replica_seed(master, i)`, and aggregation
//! happens in replica-index order after all replicas finish, so the summary
//! is identical no matter how many threads actually ran.

use rayon::prelude::*;

use growgraph::histogram::{run_process, TrajectorySummary};
use growgraph::rng::replica_seed;
use growgraph::stats::EnsembleSummary;
use growgraph::vertex::{cohort_degree_bound_check, run_vertex_process, CohortReport, VertexGraph};

use crate::config::{Backend, RunConfig};
use crate::{CliError, Result};

/// Ensemble result: the cross-replica summary plus vertex-backend extras.
#[derive(Debug)]
pub struct EnsembleOutput {
    pub summary: EnsembleSummary,
    /// Per-replica cohort degree-bound reports (vertex backend only).
    pub cohort_reports: Vec<CohortReport>,
    /// Final graph of replica 0 when an edge dump was requested.
    pub dump_graph: Option<VertexGraph>,
}

pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleOutput> {
    config.validate()?;
    let plan = config.plan();

    // Cap in-flight vertex replicas by projected memory. With dependencies
    // resolved per chunk the aggregation below still sees replica order.
    let chunk = match config.backend {
        Backend::Histogram => config.replicas,
        Backend::Vertex => {
            let per = config.projected_replica_memory_mb().max(1);
            (config.memory_cap_mb / per).clamp(1, config.replicas)
        }
    };

    let mut trajectories: Vec<TrajectorySummary> = Vec::with_capacity(config.replicas as usize);
    let mut cohort_reports = Vec::new();
    let mut dump_graph = None;

    let mut start = 0u64;
    while start < config.replicas {
        let end = (start + chunk).min(config.replicas);
        let batch: Vec<(u64, std::thread::Result<Result<ReplicaOutput>>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let seed = replica_seed(config.seed, i);
                let outcome = std::panic::catch_unwind(|| run_replica(config, &plan, seed));
                (i, outcome)
            })
            .collect();
        for (i, outcome) in batch {
            let seed = replica_seed(config.seed, i);
            let output = match outcome {
                Ok(result) => result?,
                Err(panic) => {
                    let message = panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".into());
                    return Err(CliError::Replica {
                        replica: i,
                        seed,
                        message,
                    });
                }
            };
            if let Some(report) = output.cohort {
                cohort_reports.push(report);
            }
            if i == 0 {
                dump_graph = output.graph;
            }
            trajectories.push(output.trajectory);
        }
        start = end;
    }

    let summary = EnsembleSummary::from_trajectories(config.steps, &trajectories)?;
    Ok(EnsembleOutput {
        summary,
        cohort_reports,
        dump_graph,
    })
}

struct ReplicaOutput {
    trajectory: TrajectorySummary,
    cohort: Option<CohortReport>,
    graph: Option<VertexGraph>,
}

fn run_replica(
    config: &RunConfig,
    plan: &growgraph::histogram::ObservationPlan,
    seed: u64,
) -> Result<ReplicaOutput> {
    match config.backend {
        Backend::Histogram => Ok(ReplicaOutput {
            trajectory: run_process(&config.params, config.model, config.steps, seed, plan)?,
            cohort: None,
            graph: None,
        }),
        Backend::Vertex => {
            let (trajectory, graph) = run_vertex_process(
                &config.params,
                config.model,
                config.steps,
                seed,
                plan,
                config.sampling,
                config.edge_dump,
            )?;
            let cohort = if config.steps >= 3 {
                Some(cohort_degree_bound_check(&graph, config.params.nu)?)
            } else {
                None
            };
            Ok(ReplicaOutput {
                trajectory,
                cohort,
                graph: config.edge_dump.then_some(graph),
            })
        }
    }
}
