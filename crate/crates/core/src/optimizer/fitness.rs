//! Train/validate fitness and final test evaluation of a genotype.

use std::sync::Arc;

use thiserror::Error;

use crate::datasets::SplitSeries;
use crate::linalg::Matrix;
use crate::readout::{self, ReadoutError, ReadoutWeights, RidgeConfig};
use crate::reservoir::{MscrGenotype, MscrSystem, ReservoirConfig, ReservoirError};
use crate::signs::Couplings;
use crate::topology::TopologyReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Reservoir(#[from] ReservoirError),
    #[error(transparent)]
    Readout(#[from] ReadoutError),
}

/// Everything besides the genotype that a fitness evaluation depends on.
#[derive(Debug, Clone)]
pub struct BuildContext {
    pub reservoir: ReservoirConfig,
    /// Sign matrices for every ordered encoder pair, so any searched
    /// adjacency can be built from the same draw.
    pub couplings: Arc<Couplings>,
    pub ridge: RidgeConfig,
}

impl BuildContext {
    pub fn new(reservoir: ReservoirConfig, couplings: Couplings, ridge: RidgeConfig) -> Self {
        BuildContext { reservoir, couplings: Arc::new(couplings), ridge }
    }

    pub fn build(&self, genotype: MscrGenotype) -> Result<MscrSystem, ReservoirError> {
        MscrSystem::new(genotype, &self.reservoir, &self.couplings)
    }
}

/// Post-washout states for the first `len` samples of `task`, from a zero
/// initial state.
fn collect_states(system: &mut MscrSystem, task: &SplitSeries, len: usize) -> Result<Matrix, ReservoirError> {
    system.run_sequence(&task.inputs[..len], task.lengths.washout)
}

/// Validation RMSE of a readout trained on the training segment.
pub fn validation_rmse(genotype: &MscrGenotype, task: &SplitSeries, ctx: &BuildContext) -> Result<f64, EvalError> {
    let mut system = ctx.build(genotype.clone())?;
    let states = collect_states(&mut system, task, task.validation().end)?;
    let w = task.lengths.washout;
    let train = task.train();
    let val = task.validation();
    let x_train = states.slice_rows(train.start - w..train.end - w);
    let weights = readout::fit(&x_train, &task.targets[train], &ctx.ridge)?;
    let x_val = states.slice_rows(val.start - w..val.end - w);
    let yhat = readout::predict(&x_val, &weights)?;
    Ok(readout::rmse(&yhat, &task.targets[val])?)
}

/// Search objective: validation RMSE, or +∞ for any configuration that
/// diverges or cannot be fitted.
pub fn fitness(genotype: &MscrGenotype, task: &SplitSeries, ctx: &BuildContext) -> f64 {
    match validation_rmse(genotype, task, ctx) {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

/// A genotype with its trained readout and held-out scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Genotype with the repaired adjacency actually simulated.
    pub genotype: MscrGenotype,
    pub topology: TopologyReport,
    pub weights: ReadoutWeights,
    pub validation_rmse: f64,
    pub test_rmse: f64,
    pub test_predictions: Vec<f64>,
    pub test_targets: Vec<f64>,
}

/// Runs the whole series, trains the readout on the training segment and
/// scores the validation and test segments.
pub fn train_and_test(genotype: &MscrGenotype, task: &SplitSeries, ctx: &BuildContext) -> Result<TrainedModel, EvalError> {
    let mut system = ctx.build(genotype.clone())?;
    let states = collect_states(&mut system, task, task.test().end)?;
    let w = task.lengths.washout;
    let rows = |r: std::ops::Range<usize>| states.slice_rows(r.start - w..r.end - w);
    let weights = readout::fit(&rows(task.train()), &task.targets[task.train()], &ctx.ridge)?;
    let val_pred = readout::predict(&rows(task.validation()), &weights)?;
    let validation_rmse = readout::rmse(&val_pred, &task.targets[task.validation()])?;
    let test_predictions = readout::predict(&rows(task.test()), &weights)?;
    let test_targets = task.targets[task.test()].to_vec();
    let test_rmse = readout::rmse(&test_predictions, &test_targets)?;
    Ok(TrainedModel {
        genotype: system.genotype().clone(),
        topology: system.topology().clone(),
        weights,
        validation_rmse,
        test_rmse,
        test_predictions,
        test_targets,
    })
}

/// Test-segment predictions of an already trained model, recomputed from
/// scratch.
pub fn predict_test(model_genotype: &MscrGenotype, weights: &ReadoutWeights, task: &SplitSeries, ctx: &BuildContext) -> Result<Vec<f64>, EvalError> {
    let mut system = ctx.build(model_genotype.clone())?;
    let states = collect_states(&mut system, task, task.test().end)?;
    let w = task.lengths.washout;
    let test = task.test();
    Ok(readout::predict(&states.slice_rows(test.start - w..test.end - w), weights)?)
}
