//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{SegmentLengths, TaskName, TaskSpec};
use crate::optimizer::{GaConfig, PsoConfig};
use crate::reservoir::Activation;
use crate::signs::SignMode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// One ring reservoir, input scaling tuned.
    #[serde(rename = "SCR")]
    Scr,
    /// Chain of encoders, only the first driven; `s` and `H` tuned.
    #[serde(rename = "DeepSCR")]
    DeepScr,
    /// Independent driven encoders; `s` (and the unused `H`) tuned.
    #[serde(rename = "GroupedSCR")]
    GroupedScr,
    /// GA over `d` and `A` with `s = H = 1`.
    #[serde(rename = "MSCR_GA")]
    MscrGa,
    /// PSO over `s`, `H`, `d` and `A`.
    #[serde(rename = "MSCR_PSO")]
    MscrPso,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Scr, ModelKind::DeepScr, ModelKind::GroupedScr, ModelKind::MscrGa, ModelKind::MscrPso];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Scr => "SCR",
            ModelKind::DeepScr => "DeepSCR",
            ModelKind::GroupedScr => "GroupedSCR",
            ModelKind::MscrGa => "MSCR_GA",
            ModelKind::MscrPso => "MSCR_PSO",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub name: TaskName,
    /// Prediction horizon; 84 for MG17, 1 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<SegmentLengths>,
    /// Base seed of the NARMA-10 input draw; trial `t` uses `seed + t`.
    /// Defaults to the experiment seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Min–max normalization; on for MSTSN only by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mstsn_path: Option<PathBuf>,
}

impl TaskConfig {
    pub fn new(name: TaskName) -> Self {
        TaskConfig { name, horizon: None, lengths: None, seed: None, normalize: None, mstsn_path: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoBudget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaBudget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
}

fn default_sign_mode() -> SignMode {
    SignMode::Bernoulli
}

fn default_activation() -> Activation {
    Activation::Tanh
}

fn default_rho() -> f64 {
    0.95
}

fn default_lambda() -> f64 {
    1e-4
}

fn default_true() -> bool {
    true
}

/// One experiment: a task, a model recipe and its budgets.
///
/// Unset optional fields take model-dependent defaults: `k` is 10 (1 for
/// SCR), `n` is 100 (1000 for SCR), trials are 10 with Bernoulli signs and
/// always 1 with π signs, SCR's swarm is 20×20 and every other search runs
/// 100×100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(default = "default_sign_mode")]
    pub sign_mode: SignMode,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_true")]
    pub bias: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub task: TaskConfig,
    #[serde(default)]
    pub pso: PsoBudget,
    #[serde(default)]
    pub ga: GaBudget,
}

impl ExperimentConfig {
    pub fn new(model: ModelKind, task: TaskName) -> Self {
        ExperimentConfig {
            model,
            sign_mode: default_sign_mode(),
            activation: default_activation(),
            k: None,
            n: None,
            rho: default_rho(),
            lambda: default_lambda(),
            bias: true,
            trials: None,
            seed: 0,
            output_dir: None,
            task: TaskConfig::new(task),
            pso: PsoBudget::default(),
            ga: GaBudget::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(if self.model == ModelKind::Scr { 1 } else { 10 })
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(if self.model == ModelKind::Scr { 1000 } else { 100 })
    }

    pub fn trials(&self) -> usize {
        match self.sign_mode {
            SignMode::Pi => 1,
            SignMode::Bernoulli => self.trials.unwrap_or(10),
        }
    }

    pub fn pso_config(&self, seed: u64) -> PsoConfig {
        let default = if self.model == ModelKind::Scr { 20 } else { 100 };
        PsoConfig::with_budget(
            self.pso.particles.unwrap_or(default),
            self.pso.iterations.unwrap_or(default),
            seed,
        )
    }

    pub fn ga_config(&self, seed: u64) -> GaConfig {
        GaConfig::with_budget(self.ga.population.unwrap_or(100), self.ga.generations.unwrap_or(100), seed)
    }

    /// Dataset of trial `t`. Only the NARMA-10 draw varies across trials.
    pub fn task_spec(&self, trial: usize) -> TaskSpec {
        let t = &self.task;
        let mut spec = TaskSpec::new(t.name);
        if let Some(h) = t.horizon {
            spec.horizon = h;
        }
        if let Some(l) = t.lengths {
            spec.lengths = l;
        }
        if let Some(norm) = t.normalize {
            spec.normalize = norm;
        }
        spec.mstsn_path.clone_from(&t.mstsn_path);
        if t.name == TaskName::NARMA10 {
            spec.seed = Some(t.seed.unwrap_or(self.seed).wrapping_add(trial as u64));
        }
        spec
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.k() == 0 {
            return bad("k must be at least 1");
        }
        if self.n() == 0 {
            return bad("n must be at least 1");
        }
        if self.model == ModelKind::Scr && self.k() != 1 {
            return bad("SCR is a single reservoir; k must be 1");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie strictly between 0 and 1");
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be a finite non-negative number");
        }
        if self.trials == Some(0) {
            return bad("trials must be at least 1");
        }
        let zero = |v: Option<usize>| v == Some(0);
        if zero(self.pso.particles) || zero(self.pso.iterations) || zero(self.ga.population) || zero(self.ga.generations) {
            return bad("optimizer budgets must be positive");
        }
        if self.task.name == TaskName::MSTSN && self.task.mstsn_path.is_none() {
            return bad("the MSTSN task needs task.mstsn_path (or --mstsn)");
        }
        if self.task.horizon == Some(0) {
            return bad("horizon must be at least 1");
        }
        Ok(())
    }
}
