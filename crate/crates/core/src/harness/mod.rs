//! Experiment orchestration: model recipes, trials, aggregation and
//! artifacts.

mod config;
mod output;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::datasets::{make_task, DatasetError, SplitSeries};
use crate::exec::Exec;
use crate::optimizer::{
    ga_optimize, pso_optimize, train_and_test, BuildContext, EvalError, GaLayout, SearchLayout, SearchOutcome,
    TrainedModel,
};
use crate::readout::RidgeConfig;
use crate::reservoir::ReservoirConfig;
use crate::signs::{allocate_couplings, SignMode, SignSource};
use crate::topology::{fixed_topology, BitMatrix, FixedTopology};

pub use config::{ConfigError, ExperimentConfig, GaBudget, ModelKind, PsoBudget, TaskConfig};
pub use output::{
    export_topology_dot, load_artifact, summary_header, summary_row, topology_dot, write_outputs, write_summary,
    ModelArtifact, ARTIFACT_VERSION,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("every trial diverged ({0} trials)")]
    AllTrialsDiverged(usize),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed artifact: {0}")]
    Artifact(String),
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

const STREAM_SIGNS: u64 = 1;
const STREAM_SEARCH: u64 = 2;

/// SplitMix64 finalizer over `(base, trial, stream)`.
pub fn derive_seed(base: u64, trial: usize, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t`'s Bernoulli sign stream.
pub fn sign_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(cfg.seed, trial, STREAM_SIGNS)
}

pub fn search_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(cfg.seed, trial, STREAM_SEARCH)
}

/// The dataset of trial `t`.
pub fn trial_task(cfg: &ExperimentConfig, trial: usize) -> Result<SplitSeries, HarnessError> {
    Ok(make_task(&cfg.task_spec(trial))?)
}

/// Reservoir settings and sign draw of trial `t`. Couplings are drawn for
/// the complete graph so that every searched adjacency shares one draw.
pub fn trial_context(cfg: &ExperimentConfig, trial: usize) -> BuildContext {
    let (k, n) = (cfg.k(), cfg.n());
    let mut reservoir = ReservoirConfig::new(n, cfg.rho, cfg.activation);
    reservoir.bias_enabled = cfg.bias;
    let mut src = match cfg.sign_mode {
        SignMode::Pi => SignSource::pi(),
        SignMode::Bernoulli => SignSource::bernoulli(sign_seed(cfg, trial)),
    };
    let couplings = allocate_couplings(&mut src, k, n, &BitMatrix::complete(k));
    BuildContext::new(reservoir, couplings, RidgeConfig { lambda: cfg.lambda, intercept: false })
}

/// Runs the model's search on one task and context.
pub fn search(cfg: &ExperimentConfig, task: &SplitSeries, ctx: &BuildContext, seed: u64, exec: Exec) -> SearchOutcome {
    let k = cfg.k();
    let fixed = |kind| {
        let (d, a) = fixed_topology(kind, k);
        SearchLayout::scalings(d, a)
    };
    match cfg.model {
        ModelKind::Scr => pso_optimize(task, &fixed(FixedTopology::Grouped), &cfg.pso_config(seed), ctx, exec),
        ModelKind::DeepScr => pso_optimize(task, &fixed(FixedTopology::Chain), &cfg.pso_config(seed), ctx, exec),
        ModelKind::GroupedScr => pso_optimize(task, &fixed(FixedTopology::Grouped), &cfg.pso_config(seed), ctx, exec),
        ModelKind::MscrGa => ga_optimize(task, &GaLayout::unit(k), &cfg.ga_config(seed), ctx, exec),
        ModelKind::MscrPso => pso_optimize(task, &SearchLayout::full(k), &cfg.pso_config(seed), ctx, exec),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub search: SearchOutcome,
    pub model: TrainedModel,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergentTrial {
    pub trial: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    /// Completed trials in trial order.
    pub trials: Vec<TrialResult>,
    pub divergent: Vec<DivergentTrial>,
    pub mean_rmse: f64,
    /// Population standard deviation of the per-trial test RMSE.
    pub std_rmse: f64,
    /// Index into `trials` of the lowest validation fitness.
    pub best: usize,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn test_rmses(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.model.test_rmse).collect()
    }

    pub fn best_trial(&self) -> &TrialResult {
        &self.trials[self.best]
    }

    pub fn rank(&self) -> usize {
        self.best_trial().model.topology.rank
    }

    /// `rank · n` of the best trial's model.
    pub fn effective_dim(&self) -> usize {
        self.rank() * self.config.n()
    }
}

fn run_trial(cfg: &ExperimentConfig, trial: usize, exec: Exec) -> Result<Result<TrialResult, DivergentTrial>, HarnessError> {
    let start = Instant::now();
    let task = trial_task(cfg, trial)?;
    let ctx = trial_context(cfg, trial);
    let outcome = search(cfg, &task, &ctx, search_seed(cfg, trial), exec);
    if !outcome.fitness.is_finite() {
        return Ok(Err(DivergentTrial { trial, reason: "no finite validation fitness found".into() }));
    }
    match train_and_test(&outcome.genotype, &task, &ctx) {
        Ok(model) if model.test_rmse.is_finite() => {
            Ok(Ok(TrialResult { trial, search: outcome, model, elapsed: start.elapsed() }))
        }
        Ok(_) => Ok(Err(DivergentTrial { trial, reason: "non-finite test RMSE".into() })),
        Err(e) => Ok(Err(DivergentTrial { trial, reason: e.to_string() })),
    }
}

pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every trial of `cfg` with the default execution strategy.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    run_experiment_with(cfg, Exec::default())
}

/// Trials run one after another; `exec` parallelizes the search inside
/// each trial.
pub fn run_experiment_with(cfg: &ExperimentConfig, exec: Exec) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut trials = Vec::new();
    let mut divergent = Vec::new();
    for t in 0..cfg.trials() {
        match run_trial(cfg, t, exec)? {
            Ok(r) => trials.push(r),
            Err(d) => divergent.push(d),
        }
    }
    if trials.is_empty() {
        return Err(HarnessError::AllTrialsDiverged(divergent.len()));
    }
    let rmses: Vec<f64> = trials.iter().map(|t| t.model.test_rmse).collect();
    let (mean_rmse, std_rmse) = mean_and_std(&rmses);
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.search.fitness < trials[best].search.fitness {
            best = i;
        }
    }
    Ok(RunReport { config: cfg.clone(), trials, divergent, mean_rmse, std_rmse, best, elapsed: start.elapsed() })
}
