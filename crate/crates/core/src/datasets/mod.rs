//! Benchmark series and their washout/train/validation/test segmentation.

mod generators;
mod mstsn;

use std::ops::Range;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generators::{
    gen_mackey_glass, gen_narma10, gen_narma10_guarded, mackey_glass_17, NarmaSeries, MG_DEFAULT_HISTORY,
    MG_DEFAULT_TRANSIENT, NARMA_DIVERGENCE_GUARD, NARMA_MAX_REGENERATIONS,
};
pub use mstsn::{load_mstsn, parse_mstsn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("series too short: need {needed} samples, have {got}")]
    TooShort { needed: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(String),
    #[error("cannot normalize a constant series")]
    ConstantSeries,
    #[error("generator produced a non-finite value")]
    NonFinite,
    #[error("NARMA-10 diverged for {attempts} consecutive seeds starting at {seed}")]
    PersistentDivergence { seed: u64, attempts: usize },
    #[error("the sunspot task needs a data file path")]
    MissingPath,
    #[error("invalid task: {0}")]
    InvalidTask(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskName {
    MG17,
    NARMA10,
    MSTSN,
}

impl TaskName {
    pub fn default_horizon(self) -> usize {
        match self {
            TaskName::MG17 => 84,
            TaskName::NARMA10 | TaskName::MSTSN => 1,
        }
    }
}

impl std::fmt::Display for TaskName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TaskName::MG17 => "MG17",
            TaskName::NARMA10 => "NARMA10",
            TaskName::MSTSN => "MSTSN",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLengths {
    pub washout: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl Default for SegmentLengths {
    fn default() -> Self {
        SegmentLengths { washout: 100, train: 1000, validation: 1000, test: 1000 }
    }
}

impl SegmentLengths {
    pub fn total(&self) -> usize {
        self.washout + self.train + self.validation + self.test
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: TaskName,
    pub horizon: usize,
    pub lengths: SegmentLengths,
    /// Seed of the NARMA-10 input draw.
    pub seed: Option<u64>,
    /// Min–max scale the series into [0, 1].
    pub normalize: bool,
    pub mstsn_path: Option<PathBuf>,
}

impl TaskSpec {
    pub fn new(name: TaskName) -> Self {
        TaskSpec {
            name,
            horizon: name.default_horizon(),
            lengths: SegmentLengths::default(),
            seed: None,
            normalize: name == TaskName::MSTSN,
            mstsn_path: None,
        }
    }

    pub fn mg17() -> Self {
        TaskSpec::new(TaskName::MG17)
    }

    pub fn narma10(seed: u64) -> Self {
        TaskSpec { seed: Some(seed), ..TaskSpec::new(TaskName::NARMA10) }
    }

    pub fn mstsn(path: impl Into<PathBuf>) -> Self {
        TaskSpec { mstsn_path: Some(path.into()), ..TaskSpec::new(TaskName::MSTSN) }
    }

    fn validate(&self) -> Result<(), DatasetError> {
        let l = &self.lengths;
        if self.horizon == 0 || l.washout == 0 || l.train == 0 || l.validation == 0 || l.test == 0 {
            return Err(DatasetError::InvalidTask("horizon and all segment lengths must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inputs paired with their targets (`targets[t]` is what the model should
/// emit after seeing `inputs[t]`), cut into four contiguous segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub lengths: SegmentLengths,
}

impl SplitSeries {
    pub fn washout(&self) -> Range<usize> {
        0..self.lengths.washout
    }

    pub fn train(&self) -> Range<usize> {
        let s = self.lengths.washout;
        s..s + self.lengths.train
    }

    pub fn validation(&self) -> Range<usize> {
        let s = self.train().end;
        s..s + self.lengths.validation
    }

    pub fn test(&self) -> Range<usize> {
        let s = self.validation().end;
        s..s + self.lengths.test
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Scales every target by `gamma` (inputs untouched).
    pub fn with_scaled_targets(&self, gamma: f64) -> SplitSeries {
        SplitSeries { targets: self.targets.iter().map(|v| v * gamma).collect(), ..self.clone() }
    }
}

/// Pairs `input[t] = series[t]` with `target[t] = series[t + horizon]` and
/// keeps exactly `lengths.total()` pairs.
pub fn split_aligned(series: &[f64], horizon: usize, lengths: SegmentLengths) -> Result<SplitSeries, DatasetError> {
    let total = lengths.total();
    let needed = total + horizon;
    if series.len() < needed {
        return Err(DatasetError::TooShort { needed, got: series.len() });
    }
    Ok(SplitSeries {
        inputs: series[..total].to_vec(),
        targets: series[horizon..horizon + total].to_vec(),
        lengths,
    })
}

/// Affine map `x ↦ (x − min)/(max − min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitScaling {
    pub min: f64,
    pub max: f64,
}

impl UnitScaling {
    pub fn fit(series: &[f64]) -> Result<Self, DatasetError> {
        let min = series.iter().copied().fold(f64::INFINITY, f64::min);
        let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max > min) {
            return Err(DatasetError::ConstantSeries);
        }
        Ok(UnitScaling { min, max })
    }

    pub fn apply(&self, series: &[f64]) -> Vec<f64> {
        let span = self.max - self.min;
        series.iter().map(|v| (v - self.min) / span).collect()
    }

    pub fn invert(&self, series: &[f64]) -> Vec<f64> {
        let span = self.max - self.min;
        series.iter().map(|v| v * span + self.min).collect()
    }
}

pub fn normalize_unit(series: &[f64]) -> Result<Vec<f64>, DatasetError> {
    Ok(UnitScaling::fit(series)?.apply(series))
}

/// Generates or loads the series named by `spec` and segments it.
pub fn make_task(spec: &TaskSpec) -> Result<SplitSeries, DatasetError> {
    spec.validate()?;
    let lengths = spec.lengths;
    let total = lengths.total();
    let maybe_normalize = |v: Vec<f64>| if spec.normalize { normalize_unit(&v) } else { Ok(v) };
    match spec.name {
        TaskName::MG17 => {
            let series = maybe_normalize(mackey_glass_17(total + spec.horizon)?)?;
            split_aligned(&series, spec.horizon, lengths)
        }
        TaskName::NARMA10 => {
            let narma = gen_narma10(total + spec.horizon, spec.seed.unwrap_or(0))?;
            let inputs = maybe_normalize(narma.inputs)?;
            let outputs = maybe_normalize(narma.outputs)?;
            Ok(SplitSeries {
                inputs: inputs[..total].to_vec(),
                targets: outputs[spec.horizon..spec.horizon + total].to_vec(),
                lengths,
            })
        }
        TaskName::MSTSN => {
            let path = spec.mstsn_path.as_ref().ok_or(DatasetError::MissingPath)?;
            let series = maybe_normalize(load_mstsn(path)?)?;
            split_aligned(&series, spec.horizon, lengths)
        }
    }
}
