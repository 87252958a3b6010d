//! Experiment cells, CSV traces and the summary table.
//!
//! A cell is one (seed, algorithm) pair. All algorithms of a seed share the
//! cell seed, hence the same horizons and start states. Cells run on a
//! bounded rayon pool; results are collected in cell order and written by
//! the calling thread, so the output does not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mbandit_core::evaluation::ExactRegret;
use mbandit_core::{
    derive_seed, monte_carlo_deltas, run_learner_timed, Algorithm, BanditInstance, Clock, LearnerConfig,
    PriorConfig, RegretTrace, ScenarioSpec,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Environment, ExperimentConfig, RegretMode, Seeds};
use crate::error::{CliError, Result};
use crate::instance_file::load_instance;

/// Wall clock measured from its creation.
#[derive(Debug, Clone, Copy)]
pub struct InstantClock(Instant);

impl InstantClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for InstantClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for InstantClock {
    fn now(&self) -> std::time::Duration {
        self.0.elapsed()
    }
}

/// The environment of an experiment, resolved from its config.
#[derive(Debug, Clone)]
pub struct ResolvedEnvironment {
    pub label: String,
    pub instance: BanditInstance,
    pub prior: PriorConfig,
    pub warnings: Vec<String>,
}

pub fn resolve_environment(cfg: &ExperimentConfig) -> Result<ResolvedEnvironment> {
    match &cfg.environment {
        Environment::Builtin(name) => {
            let spec = ScenarioSpec {
                discount: cfg.discount,
                seed: master_seed(&cfg.seeds),
                lower_bound: cfg.lower_bound,
                ..ScenarioSpec::new(*name)
            };
            Ok(ResolvedEnvironment {
                label: name.name().into(),
                instance: spec.build()?,
                prior: cfg.prior.unwrap_or_default(),
                warnings: Vec::new(),
            })
        }
        Environment::File(path) => {
            let (mut instance, prior, warnings) = load_instance(path)?;
            if let Some(d) = cfg.discount {
                instance.discount = d;
                instance = instance.validated()?;
            }
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into());
            Ok(ResolvedEnvironment {
                label,
                instance,
                prior: cfg.prior.or(prior).unwrap_or_default(),
                warnings,
            })
        }
    }
}

fn master_seed(seeds: &Seeds) -> u64 {
    match seeds {
        Seeds::Derived { master, .. } => *master,
        Seeds::Explicit(list) => list[0],
    }
}

/// Seed of the `index`-th cell row; independent of the algorithm.
pub fn cell_seed(seeds: &Seeds, label: &str, index: usize) -> u64 {
    match seeds {
        Seeds::Derived { master, .. } => derive_seed(*master, &[label, "seed", &index.to_string()]),
        Seeds::Explicit(list) => list[index],
    }
}

pub fn trace_file_name(label: &str, algorithm: Algorithm, seed_index: usize) -> String {
    format!("{label}__{}__seed{seed_index:03}.csv", algorithm.name())
}

pub fn summary_file_name(label: &str) -> String {
    format!("{label}__summary.csv")
}

#[derive(Debug, Clone)]
pub struct CellOutput {
    pub algorithm: Algorithm,
    pub seed_index: usize,
    pub seed: u64,
    pub horizons: Vec<u64>,
    pub trace: RegretTrace,
    pub policy_ms: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    algorithm: &'a str,
    seed: u64,
    episode: usize,
    horizon: u64,
    delta: f64,
    cumulative_delta: f64,
    policy_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub seeds: usize,
    #[serde(rename = "K")]
    pub episodes: usize,
    pub final_regret_mean: f64,
    pub final_regret_std: f64,
    pub policy_ms_mean: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub label: String,
    pub regret: RegretMode,
    pub trace_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    pub summary: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

pub fn regret_mode(cfg: &ExperimentConfig, instance: &BanditInstance) -> RegretMode {
    cfg.regret.unwrap_or(if instance.global_state_count() <= cfg.state_cap {
        RegretMode::Exact
    } else {
        RegretMode::MonteCarlo
    })
}

pub fn run_cell(
    env: &ResolvedEnvironment,
    cfg: &ExperimentConfig,
    mode: RegretMode,
    algorithm: Algorithm,
    seed_index: usize,
) -> Result<CellOutput, mbandit_core::Error> {
    let seed = cell_seed(&cfg.seeds, &env.label, seed_index);
    let learner = LearnerConfig {
        prior: env.prior,
        evi_state_cap: cfg.state_cap,
        ..LearnerConfig::new(algorithm, cfg.episodes, seed)
    };
    let run = run_learner_timed(&env.instance, &learner, &InstantClock::new())?;
    let trace = match mode {
        RegretMode::Exact => ExactRegret::new(&env.instance, cfg.state_cap)?.trace(&run)?,
        RegretMode::MonteCarlo => monte_carlo_deltas(&env.instance, &run, cfg.replicas, seed)?,
    };
    Ok(CellOutput {
        algorithm,
        seed_index,
        seed,
        horizons: run.records.iter().map(|r| r.horizon).collect(),
        policy_ms: run.records.iter().map(|r| r.policy_time.as_secs_f64() * 1e3).collect(),
        trace,
    })
}

pub fn write_trace(path: &Path, cell: &CellOutput) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for (k, h) in cell.horizons.iter().enumerate() {
        w.serialize(TraceRow {
            algorithm: cell.algorithm.name(),
            seed: cell.seed,
            episode: k + 1,
            horizon: *h,
            delta: cell.trace.deltas[k],
            cumulative_delta: cell.trace.cumulative[k],
            policy_ms: cell.policy_ms[k],
        })?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn summarize(cells: &[CellOutput], algorithms: &[Algorithm], episodes: usize) -> Vec<SummaryRow> {
    algorithms
        .iter()
        .filter_map(|&alg| {
            let mine: Vec<&CellOutput> = cells.iter().filter(|c| c.algorithm == alg).collect();
            if mine.is_empty() {
                return None;
            }
            let finals: Vec<f64> = mine.iter().map(|c| c.trace.final_regret()).collect();
            let times: Vec<f64> = mine.iter().flat_map(|c| c.policy_ms.iter().copied()).collect();
            Some(SummaryRow {
                algorithm: alg.name().into(),
                seeds: mine.len(),
                episodes,
                final_regret_mean: mean(&finals),
                final_regret_std: std_dev(&finals),
                policy_ms_mean: mean(&times),
            })
        })
        .collect()
}

/// Runs every cell, writes one trace CSV per cell and a summary CSV. Cells
/// that fail are reported together after the successful ones are written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let env = resolve_environment(cfg)?;
    let mode = regret_mode(cfg, &env.instance);
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;

    let cells: Vec<(usize, Algorithm)> = (0..cfg.seeds.len())
        .flat_map(|i| cfg.algorithms.iter().map(move |&a| (i, a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    let results: Vec<Result<CellOutput, mbandit_core::Error>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, alg)| run_cell(&env, cfg, mode, alg, i))
            .collect()
    });

    let mut outputs = Vec::new();
    let mut failures = Vec::new();
    let mut trace_files = Vec::new();
    for ((i, alg), res) in cells.iter().zip(results) {
        match res {
            Ok(cell) => {
                let path = cfg.out.join(trace_file_name(&env.label, *alg, *i));
                write_trace(&path, &cell)?;
                trace_files.push(path);
                outputs.push(cell);
            }
            Err(e) => failures.push(format!("  {} seed #{i}: {e}", alg.name())),
        }
    }

    let summary = summarize(&outputs, &cfg.algorithms, cfg.episodes);
    let summary_file = cfg.out.join(summary_file_name(&env.label));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&summary_file)?;
    for row in &summary {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(&summary_file, e))?;

    if !failures.is_empty() {
        return Err(CliError::CellFailures(failures));
    }
    Ok(ExperimentReport {
        label: env.label,
        regret: mode,
        trace_files,
        summary_file,
        summary,
        warnings: env.warnings,
    })
}
