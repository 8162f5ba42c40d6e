//! Genotype search: particle swarm over continuous encodings, a binary GA
//! baseline over the structure bits, and the validation-RMSE objective.

mod fitness;
mod ga;
mod layout;
mod pso;

use serde::{Deserialize, Serialize};

use crate::datasets::SplitSeries;
use crate::exec::Exec;
use crate::reservoir::MscrGenotype;

pub use fitness::{fitness, predict_test, train_and_test, validation_rmse, BuildContext, EvalError, TrainedModel};
pub use ga::{ga_minimize, GaConfig, GaResult};
pub use layout::{binarize, off_diagonal, GenotypeLayout, SearchLayout};
pub use pso::{pso_minimize, pso_step, update_particle, InertiaSchedule, Particle, PsoConfig, PsoResult, Swarm};

/// Best genotype found by a search, with its validation fitness and the
/// best-so-far trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub genotype: MscrGenotype,
    pub fitness: f64,
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// PSO over the coordinates described by `layout`.
pub fn pso_optimize(task: &SplitSeries, layout: &SearchLayout, cfg: &PsoConfig, ctx: &BuildContext, exec: Exec) -> SearchOutcome {
    let r = pso_minimize(layout.dim(), cfg, exec, |x| fitness(&layout.decode(x), task, ctx));
    SearchOutcome {
        genotype: layout.decode(&r.best_position),
        fitness: r.best_fitness,
        trace: r.trace,
        evaluations: r.evaluations,
    }
}

/// Fixed scalings for the GA baseline, which searches only `d` and `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaLayout {
    pub s: Vec<f64>,
    /// Row-major k×k, `h[from * k + to]`.
    pub h: Vec<f64>,
}

impl GaLayout {
    /// `s = 1` and `H = 1` off the diagonal.
    pub fn unit(k: usize) -> Self {
        let mut h = vec![1.0; k * k];
        for i in 0..k {
            h[i * k + i] = 0.0;
        }
        GaLayout { s: vec![1.0; k], h }
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    /// Bits are `d` (k) followed by off-diagonal `A` in row-major order.
    pub fn decode(&self, bits: &[bool]) -> MscrGenotype {
        let k = self.k();
        assert_eq!(bits.len(), k * k, "bitstring length");
        let mut g = MscrGenotype::new(k);
        g.s.clone_from(&self.s);
        g.h.clone_from(&self.h);
        g.d.copy_from_slice(&bits[..k]);
        for ((from, to), &b) in off_diagonal(k).zip(&bits[k..]) {
            g.a.set(from, to, b);
        }
        g.clear_self_loops();
        g
    }

    pub fn encode(&self, g: &MscrGenotype) -> Vec<bool> {
        let mut bits = g.d.clone();
        bits.extend(off_diagonal(g.k).map(|(f, t)| g.a.get(f, t)));
        bits
    }
}

/// GA over the `d ‖ A` bitstring with `s` and `H` held at `layout`.
pub fn ga_optimize(task: &SplitSeries, layout: &GaLayout, cfg: &GaConfig, ctx: &BuildContext, exec: Exec) -> SearchOutcome {
    let k = layout.k();
    let r = ga_minimize(k * k, cfg, exec, |bits| fitness(&layout.decode(bits), task, ctx));
    SearchOutcome {
        genotype: layout.decode(&r.best_bits),
        fitness: r.best_fitness,
        trace: r.trace,
        evaluations: r.evaluations,
    }
}
