//! Result files: summary table, predictions, fitness traces, the model
//! artifact and the DOT rendering of a topology.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{trial_context, trial_task, ExperimentConfig, HarnessError, RunReport};
use crate::optimizer::predict_test;
use crate::readout::{rmse, ReadoutWeights};
use crate::reservoir::MscrGenotype;
use crate::signs::SignMode;
use crate::topology::{analyze, TopologyReport};

pub const ARTIFACT_VERSION: u32 = 1;

pub fn summary_header() -> &'static str {
    "model\ttask\tdistribution\tactivation\tmean_rmse\tstd_rmse\trank\teffective_dim\ttrials\tdivergent"
}

pub fn summary_row(report: &RunReport) -> String {
    let c = &report.config;
    let dist = match c.sign_mode {
        SignMode::Pi => "pi",
        SignMode::Bernoulli => "bernoulli",
    };
    format!(
        "{}\t{}\t{}\t{:?}\t{:.6e}\t{:.6e}\t{}\t{}\t{}\t{}",
        c.model,
        c.task.name,
        dist,
        c.activation,
        report.mean_rmse,
        report.std_rmse,
        report.rank(),
        report.effective_dim(),
        report.trials.len(),
        report.divergent.len()
    )
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// One summary line per report, under a header.
pub fn write_summary(reports: &[&RunReport], path: &Path) -> Result<(), HarnessError> {
    let mut s = String::from(summary_header());
    s.push('\n');
    for r in reports {
        s.push_str(&summary_row(r));
        s.push('\n');
    }
    write(path, &s)
}

/// Best genotype, its readout and the config that produced it. Together
/// with the config's seeds this rebuilds the exact dataset and sign draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u32,
    pub trial: usize,
    pub validation_rmse: f64,
    pub test_rmse: f64,
    pub config: ExperimentConfig,
    pub genotype: MscrGenotype,
    pub readout: ReadoutWeights,
}

impl ModelArtifact {
    pub fn from_report(report: &RunReport) -> Self {
        let best = report.best_trial();
        ModelArtifact {
            version: ARTIFACT_VERSION,
            trial: best.trial,
            validation_rmse: best.model.validation_rmse,
            test_rmse: best.model.test_rmse,
            config: report.config.clone(),
            genotype: best.model.genotype.clone(),
            readout: best.model.weights.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        let body = toml::to_string(self).expect("artifact is always representable as TOML");
        format!("# mscr model artifact\n{body}")
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let a: ModelArtifact = toml::from_str(text).map_err(|e| HarnessError::Artifact(e.to_string()))?;
        if a.version != ARTIFACT_VERSION {
            return Err(HarnessError::Artifact(format!("unsupported version {}", a.version)));
        }
        Ok(a)
    }

    /// Rebuilds the trial's dataset and reservoir and returns test
    /// predictions, test targets and their RMSE.
    pub fn predict_test(&self) -> Result<(Vec<f64>, Vec<f64>, f64), HarnessError> {
        let task = trial_task(&self.config, self.trial)?;
        let ctx = trial_context(&self.config, self.trial);
        let pred = predict_test(&self.genotype, &self.readout, &task, &ctx)?;
        let targets = task.targets[task.test()].to_vec();
        let e = rmse(&pred, &targets).map_err(crate::optimizer::EvalError::from)?;
        Ok((pred, targets, e))
    }

    pub fn topology(&self) -> TopologyReport {
        analyze(&self.genotype.a, &self.genotype.d).1
    }
}

pub fn load_artifact(path: &Path) -> Result<ModelArtifact, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    ModelArtifact::from_toml(&text)
}

/// DOT digraph of the valid encoders: an input node `u` with an edge to
/// every driven encoder (labeled with its `s`), and the kept inter-encoder
/// edges (labeled with `H`). Invalid encoders and their edges are left out.
pub fn topology_dot(genotype: &MscrGenotype, topology: &TopologyReport) -> String {
    let valid = &topology.valid_mask;
    let mut s = String::from("digraph mscr {\n  rankdir=LR;\n  u [shape=box, label=\"input\"];\n");
    for i in (0..genotype.k).filter(|&i| valid[i]) {
        let _ = writeln!(s, "  e{i} [label=\"encoder {i}\"];");
    }
    for i in (0..genotype.k).filter(|&i| valid[i] && genotype.d[i]) {
        let _ = writeln!(s, "  u -> e{i} [label=\"{}\"];", genotype.s[i]);
    }
    for (from, to) in genotype.a.edges() {
        if from != to && valid[from] && valid[to] {
            let _ = writeln!(s, "  e{from} -> e{to} [label=\"{}\"];", genotype.h(from, to));
        }
    }
    s.push_str("}\n");
    s
}

pub fn export_topology_dot(genotype: &MscrGenotype, topology: &TopologyReport, path: &Path) -> Result<(), HarnessError> {
    write(path, &topology_dot(genotype, topology))
}

/// Writes into `dir`:
/// - `summary.tsv`: one row for this report
/// - `timing.tsv`: wall-clock seconds per trial (kept apart so every other
///   file is reproducible byte for byte)
/// - `predictions_trial{t}.csv`: test predictions against targets
/// - `trace.csv`: best-so-far fitness per trial and iteration
/// - `model.toml`: the best trial's artifact
/// - `topology.dot`: the best trial's topology
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_summary(&[report], &dir.join("summary.tsv"))?;

    let mut timing = String::from("trial\tseconds\n");
    for t in &report.trials {
        let _ = writeln!(timing, "{}\t{:.3}", t.trial, t.elapsed.as_secs_f64());
    }
    let _ = writeln!(timing, "total\t{:.3}", report.elapsed.as_secs_f64());
    write(&dir.join("timing.tsv"), &timing)?;

    for t in &report.trials {
        let start = report.config.task_spec(t.trial).lengths;
        let offset = start.washout + start.train + start.validation;
        let mut csv = String::from("t,prediction,target\n");
        for (i, (p, y)) in t.model.test_predictions.iter().zip(&t.model.test_targets).enumerate() {
            let _ = writeln!(csv, "{},{p:e},{y:e}", offset + i);
        }
        write(&dir.join(format!("predictions_trial{}.csv", t.trial)), &csv)?;
    }

    let mut trace = String::from("trial,iteration,best_fitness\n");
    for t in &report.trials {
        for (i, f) in t.search.trace.iter().enumerate() {
            let _ = writeln!(trace, "{},{i},{f:e}", t.trial);
        }
    }
    write(&dir.join("trace.csv"), &trace)?;

    write(&dir.join("model.toml"), &ModelArtifact::from_report(report).to_toml())?;
    let best = report.best_trial();
    export_topology_dot(&best.model.genotype, &best.model.topology, &dir.join("topology.dot"))
}
