//! Multi-run experiments and their on-disk artifacts.

mod output;
mod plot;
mod sweep;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::federation::{run_optimization_with, RunTrace};

pub use output::{emit_summary, emit_trace, emit_traces, parse_summary, TRACE_HEADER};
pub use plot::render_plot;
pub use sweep::{SweepFile, SweepPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: usize,
    pub seed: u64,
    pub final_best: f64,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub mean: f64,
    /// Population standard deviation (divisor `runs`).
    pub std: f64,
    pub config: ExperimentConfig,
    pub runs: Vec<RunSummary>,
}

impl ExperimentSummary {
    pub fn finals(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.final_best).collect()
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Seed of run `run_id` in an experiment.
pub fn run_seed(cfg: &ExperimentConfig, run_id: usize) -> u64 {
    cfg.master_seed.wrapping_add(run_id as u64)
}

/// Execute `cfg.runs` independent runs with seeds `master_seed + i`.
///
/// In parallel mode the runs themselves are spread across threads and each
/// run executes sequentially; a single run parallelizes internally instead.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<(ExperimentSummary, Vec<RunTrace>)> {
    cfg.validate()?;
    let inner = if cfg.runs > 1 { Execution::Sequential } else { exec };
    let results = exec.map_range(cfg.runs, |run_id| {
        let seed = run_seed(cfg, run_id);
        let start = Instant::now();
        let trace =
            run_optimization_with(cfg, seed, inner).map_err(|e| Error::RunFailed { seed, source: Box::new(e) })?;
        Ok::<_, Error>((RunTrace { run_id, ..trace }, start.elapsed().as_secs_f64()))
    });

    let mut traces = Vec::with_capacity(cfg.runs);
    let mut runs = Vec::with_capacity(cfg.runs);
    for result in results {
        let (trace, secs) = result?;
        runs.push(RunSummary {
            run_id: trace.run_id,
            seed: trace.seed,
            final_best: trace.final_best(),
            wall_clock_secs: secs,
        });
        traces.push(trace);
    }
    let (mean, std) = mean_std(&runs.iter().map(|r| r.final_best).collect::<Vec<_>>());
    Ok((ExperimentSummary { mean, std, config: cfg.clone(), runs }, traces))
}
