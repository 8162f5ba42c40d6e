//! Simple cycle reservoirs and their multi-encoder composition.
//!
//! Each vertex-encoder is a ring: its recurrent coupling is `ρ·C`, where `C`
//! moves coordinate `r` to coordinate `(r + 1) mod n`. Encoders receive the
//! scalar external input through a ±1 sign vector, the *same-step* states of
//! upstream encoders through ±1 sign matrices, and optionally a tiny ±1 bias.
//!
//! Upstream states are same-step, so encoders are updated in topological
//! order of the (repaired, acyclic) adjacency.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, gemm, MatView, Matrix};
use crate::signs::{allocate_couplings, Couplings, SignSource};
use crate::topology::{analyze, BitMatrix, TopologyReport};

pub const DEFAULT_BIAS_SCALE: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReservoirError {
    #[error("contraction factor must lie strictly inside (0, 1), got {0}")]
    InvalidRho(f64),
    #[error("encoder dimension must be positive")]
    ZeroDimension,
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("{0} contains a value other than ±1")]
    NotASign(&'static str),
    #[error("no coupling matrix allocated for edge {from} -> {to}")]
    MissingCoupling { from: usize, to: usize },
    #[error("non-finite state in encoder {encoder} at step {step}")]
    NonFiniteState { encoder: usize, step: usize },
    #[error("washout {washout} exceeds input length {len}")]
    WashoutTooLong { washout: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Activation {
    #[default]
    Identity,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: &mut [f64]) {
        if self == Activation::Tanh {
            x.iter_mut().for_each(|v| *v = v.tanh());
        }
    }
}

/// `out = ρ·C·state`, i.e. `out[(r + 1) mod n] = ρ·state[r]`.
#[inline]
pub fn cycle_shift_into(state: &[f64], rho: f64, out: &mut [f64]) {
    let n = state.len();
    debug_assert_eq!(out.len(), n);
    if n == 0 {
        return;
    }
    out[0] = rho * state[n - 1];
    for (o, s) in out[1..].iter_mut().zip(&state[..n - 1]) {
        *o = rho * s;
    }
}

pub fn cycle_shift(state: &[f64], rho: f64) -> Vec<f64> {
    let mut out = vec![0.0; state.len()];
    cycle_shift_into(state, rho, &mut out);
    out
}

fn check_signs(what: &'static str, v: &[f64], n: usize) -> Result<(), ReservoirError> {
    if v.len() != n {
        return Err(ReservoirError::LengthMismatch { what, expected: n, got: v.len() });
    }
    if v.iter().any(|&x| x != 1.0 && x != -1.0) {
        return Err(ReservoirError::NotASign(what));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<(), ReservoirError> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(ReservoirError::InvalidRho(rho))
    }
}

/// One ring reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct ScrParams {
    pub n: usize,
    pub rho: f64,
    pub input_signs: Vec<f64>,
    pub bias_signs: Vec<f64>,
    pub bias_scale: f64,
    pub bias_enabled: bool,
}

impl ScrParams {
    pub fn new(
        rho: f64,
        input_signs: Vec<f64>,
        bias_signs: Vec<f64>,
        bias_scale: f64,
        bias_enabled: bool,
    ) -> Result<Self, ReservoirError> {
        let n = input_signs.len();
        if n == 0 {
            return Err(ReservoirError::ZeroDimension);
        }
        check_rho(rho)?;
        check_signs("input signs", &input_signs, n)?;
        check_signs("bias signs", &bias_signs, n)?;
        Ok(ScrParams { n, rho, input_signs, bias_signs, bias_scale, bias_enabled })
    }
}

/// An SCR embedded in a multi-reservoir, with the sign matrices of its
/// incoming edges keyed by source encoder.
#[derive(Debug, Clone)]
pub struct VertexEncoder {
    pub params: ScrParams,
    pub cross_signs: BTreeMap<usize, Arc<[f64]>>,
    pub state: Vec<f64>,
}

/// The searched object: input scalings `s`, inter-encoder scalings `H`,
/// input attachment `d` and adjacency `A`. `H` and `A` are both indexed
/// `(from, to)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MscrGenotype {
    pub k: usize,
    pub s: Vec<f64>,
    /// Row-major k×k, `h[from * k + to]`.
    pub h: Vec<f64>,
    pub d: Vec<bool>,
    pub a: BitMatrix,
}

impl MscrGenotype {
    pub fn new(k: usize) -> Self {
        MscrGenotype { k, s: vec![0.0; k], h: vec![0.0; k * k], d: vec![false; k], a: BitMatrix::new(k) }
    }

    /// Single driven encoder with input scaling `s`.
    pub fn single(s: f64) -> Self {
        MscrGenotype { k: 1, s: vec![s], h: vec![0.0], d: vec![true], a: BitMatrix::new(1) }
    }

    #[inline]
    pub fn h(&self, from: usize, to: usize) -> f64 {
        self.h[from * self.k + to]
    }

    pub fn set_h(&mut self, from: usize, to: usize, v: f64) {
        self.h[from * self.k + to] = v;
    }

    /// Zeroes the diagonals of `H` and `A`.
    pub fn clear_self_loops(&mut self) {
        for i in 0..self.k {
            self.h[i * self.k + i] = 0.0;
            self.a.set(i, i, false);
        }
    }

    fn check(&self) -> Result<(), ReservoirError> {
        let k = self.k;
        let lens = [("s", self.s.len(), k), ("H", self.h.len(), k * k), ("d", self.d.len(), k), ("A", self.a.k(), k)];
        for (what, got, expected) in lens {
            if got != expected {
                return Err(ReservoirError::LengthMismatch { what, expected, got });
            }
        }
        Ok(())
    }
}

/// Shared construction parameters of every encoder in a system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    pub n: usize,
    pub rho: f64,
    pub activation: Activation,
    pub bias_scale: f64,
    pub bias_enabled: bool,
}

impl ReservoirConfig {
    pub fn new(n: usize, rho: f64, activation: Activation) -> Self {
        ReservoirConfig { n, rho, activation, bias_scale: DEFAULT_BIAS_SCALE, bias_enabled: true }
    }

    pub fn without_bias(mut self) -> Self {
        self.bias_enabled = false;
        self
    }
}

/// A stepping multi-reservoir.
#[derive(Debug, Clone)]
pub struct MscrSystem {
    genotype: MscrGenotype,
    encoders: Vec<VertexEncoder>,
    activation: Activation,
    report: TopologyReport,
    /// Steps taken since construction or the last reset.
    time: usize,
}

impl MscrSystem {
    /// Builds a system. Cycles in `genotype.a` are removed first (see
    /// [`crate::topology::repair_dag`]); the stored genotype carries the
    /// repaired adjacency.
    pub fn new(
        mut genotype: MscrGenotype,
        cfg: &ReservoirConfig,
        couplings: &Couplings,
    ) -> Result<Self, ReservoirError> {
        genotype.check()?;
        if cfg.n == 0 {
            return Err(ReservoirError::ZeroDimension);
        }
        check_rho(cfg.rho)?;
        let k = genotype.k;
        if couplings.k() != k || couplings.n() != cfg.n {
            return Err(ReservoirError::LengthMismatch {
                what: "couplings",
                expected: k * cfg.n,
                got: couplings.k() * couplings.n(),
            });
        }
        genotype.clear_self_loops();
        let (repaired, report) = analyze(&genotype.a, &genotype.d);
        genotype.a = repaired;

        let mut encoders = Vec::with_capacity(k);
        for to in 0..k {
            let params = ScrParams::new(
                cfg.rho,
                couplings.input(to).to_vec(),
                couplings.bias(to).to_vec(),
                cfg.bias_scale,
                cfg.bias_enabled,
            )?;
            let mut cross_signs = BTreeMap::new();
            for from in 0..k {
                if genotype.a.get(from, to) {
                    let m = couplings.cross_shared(from, to).ok_or(ReservoirError::MissingCoupling { from, to })?;
                    cross_signs.insert(from, m);
                }
            }
            encoders.push(VertexEncoder { params, cross_signs, state: vec![0.0; cfg.n] });
        }
        Ok(MscrSystem { genotype, encoders, activation: cfg.activation, report, time: 0 })
    }

    pub fn k(&self) -> usize {
        self.genotype.k
    }

    pub fn n(&self) -> usize {
        self.encoders[0].params.n
    }

    pub fn state_dim(&self) -> usize {
        self.k() * self.n()
    }

    pub fn genotype(&self) -> &MscrGenotype {
        &self.genotype
    }

    pub fn encoders(&self) -> &[VertexEncoder] {
        &self.encoders
    }

    pub fn topology(&self) -> &TopologyReport {
        &self.report
    }

    pub fn eval_order(&self) -> &[usize] {
        &self.report.eval_order
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Concatenated state `(x⁽¹⁾, …, x⁽ᵏ⁾)`.
    pub fn state(&self) -> Vec<f64> {
        self.encoders.iter().flat_map(|e| e.state.iter().copied()).collect()
    }

    /// Overwrites the concatenated state.
    pub fn set_state(&mut self, state: &[f64]) {
        assert_eq!(state.len(), self.state_dim());
        let n = self.n();
        for (enc, chunk) in self.encoders.iter_mut().zip(state.chunks(n)) {
            enc.state.copy_from_slice(chunk);
        }
    }

    pub fn reset(&mut self) {
        for e in &mut self.encoders {
            e.state.iter_mut().for_each(|x| *x = 0.0);
        }
        self.time = 0;
    }

    pub fn time(&self) -> usize {
        self.time
    }

    /// External drive of encoder `i` for input `u` (zero when not attached).
    #[inline]
    fn input_gain(&self, i: usize) -> f64 {
        if self.genotype.d[i] {
            self.genotype.s[i]
        } else {
            0.0
        }
    }

    /// Advances every encoder by one time step and returns the concatenated
    /// state.
    pub fn step(&mut self, u: f64) -> Result<Vec<f64>, ReservoirError> {
        let n = self.n();
        let mut next = vec![0.0; n];
        for pos in 0..self.report.eval_order.len() {
            let i = self.report.eval_order[pos];
            let gain = self.input_gain(i) * u;
            let enc = &self.encoders[i];
            cycle_shift_into(&enc.state, enc.params.rho, &mut next);
            if gain != 0.0 {
                for (x, v) in next.iter_mut().zip(&enc.params.input_signs) {
                    *x += gain * v;
                }
            }
            for (&from, signs) in &enc.cross_signs {
                let scale = self.genotype.h(from, i);
                let upstream = &self.encoders[from].state;
                for (r, x) in next.iter_mut().enumerate() {
                    *x += scale * dot(&signs[r * n..(r + 1) * n], upstream);
                }
            }
            if enc.params.bias_enabled {
                let b = enc.params.bias_scale;
                for (x, v) in next.iter_mut().zip(&enc.params.bias_signs) {
                    *x += b * v;
                }
            }
            self.activation.apply(&mut next);
            if next.iter().any(|x| !x.is_finite()) {
                return Err(ReservoirError::NonFiniteState { encoder: i, step: self.time });
            }
            self.encoders[i].state.copy_from_slice(&next);
        }
        self.time += 1;
        Ok(self.state())
    }

    /// Drives the system through `inputs` from its current state (zero after
    /// construction) and returns the states after the first `washout` steps,
    /// one row per time step, `k·n` columns.
    ///
    /// Computed encoder by encoder in evaluation order: the same-step
    /// upstream drive of a whole trajectory is one matrix product.
    pub fn run_sequence(&mut self, inputs: &[f64], washout: usize) -> Result<Matrix, ReservoirError> {
        let len = inputs.len();
        if washout > len {
            return Err(ReservoirError::WashoutTooLong { washout, len });
        }
        let n = self.n();
        let k = self.k();
        let mut trajectories: Vec<Option<Matrix>> = vec![None; k];
        for pos in 0..k {
            let i = self.report.eval_order[pos];
            let enc = &self.encoders[i];
            let mut traj = Matrix::zeros(len, n);
            for (&from, signs) in &enc.cross_signs {
                let upstream = trajectories[from].as_ref().expect("upstream encoder runs first");
                gemm(
                    len,
                    n,
                    n,
                    self.genotype.h(from, i),
                    MatView::row_major(upstream.as_slice(), n),
                    MatView::transposed(signs, n),
                    1.0,
                    traj.as_mut_slice(),
                    n,
                );
            }
            let gain = self.input_gain(i);
            let rho = enc.params.rho;
            let bias = if enc.params.bias_enabled { enc.params.bias_scale } else { 0.0 };
            let mut prev = enc.state.clone();
            for (t, &u) in inputs.iter().enumerate() {
                let row = traj.row_mut(t);
                let drive = gain * u;
                // row holds the upstream drive; add the rotated previous state.
                row[0] += rho * prev[n - 1];
                for r in 1..n {
                    row[r] += rho * prev[r - 1];
                }
                if drive != 0.0 {
                    for (x, v) in row.iter_mut().zip(&enc.params.input_signs) {
                        *x += drive * v;
                    }
                }
                if bias != 0.0 {
                    for (x, v) in row.iter_mut().zip(&enc.params.bias_signs) {
                        *x += bias * v;
                    }
                }
                self.activation.apply(row);
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(ReservoirError::NonFiniteState { encoder: i, step: self.time + t });
                }
                prev.copy_from_slice(row);
            }
            trajectories[i] = Some(traj);
        }

        let rows = len - washout;
        let mut out = Matrix::zeros(rows, k * n);
        for (i, traj) in trajectories.iter().enumerate() {
            let traj = traj.as_ref().expect("every encoder ran");
            for t in 0..rows {
                out.row_mut(t)[i * n..(i + 1) * n].copy_from_slice(traj.row(washout + t));
            }
            if len > 0 {
                self.encoders[i].state.copy_from_slice(traj.row(len - 1));
            }
        }
        self.time += len;
        Ok(out)
    }
}

/// A single SCR expressed as an order-1 multi-reservoir.
pub fn scr_single(
    cfg: &ReservoirConfig,
    input_scale: f64,
    source: &mut SignSource,
) -> Result<MscrSystem, ReservoirError> {
    let couplings = allocate_couplings(source, 1, cfg.n, &BitMatrix::new(1));
    MscrSystem::new(MscrGenotype::single(input_scale), cfg, &couplings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ones_couplings(k: usize, n: usize) -> Couplings {
        Couplings::from_parts(
            k,
            n,
            vec![vec![1.0; n]; k],
            (0..k * k).map(|idx| (idx / k != idx % k).then(|| vec![1.0; n * n])).collect(),
            vec![vec![1.0; n]; k],
        )
    }

    #[test]
    fn shift_moves_index_forward() {
        assert_eq!(cycle_shift(&[1.0, 0.0, 0.0], 0.5), vec![0.0, 0.5, 0.0]);
        assert_eq!(cycle_shift(&[7.0], 0.5), vec![3.5]);
    }

    #[test]
    fn shift_power_is_scaled_identity() {
        let rho: f64 = 0.999;
        let mut x = vec![1.0, 2.0, 3.0];
        for _ in 0..3 {
            x = cycle_shift(&x, rho);
        }
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - rho.powi(3) * b).abs() < 1e-15);
        }
    }

    #[test]
    fn shift_matches_permutation_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        // C[i][j] = 1 iff i == (j + 1) mod 5
        let c = Matrix::from_fn(5, 5, |i, j| if i == (j + 1) % 5 { 0.9 } else { 0.0 });
        let dense = c.mul_vec(&x);
        assert_eq!(cycle_shift(&x, 0.9), dense);
    }

    #[test]
    fn first_step_from_zero() {
        let mut g = MscrGenotype::new(2);
        g.s = vec![1.0, 1.0];
        g.d = vec![true, true];
        let cfg = ReservoirConfig::new(2, 0.9, Activation::Identity).without_bias();
        let mut sys = MscrSystem::new(g, &cfg, &ones_couplings(2, 2)).unwrap();
        assert_eq!(sys.step(1.0).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn zero_coupling_keeps_downstream_silent() {
        let mut g = MscrGenotype::new(2);
        g.s = vec![1.0, 1.0];
        g.d = vec![true, false];
        g.a.set(0, 1, true);
        g.set_h(0, 1, 0.0);
        let cfg = ReservoirConfig::new(3, 0.9, Activation::Tanh).without_bias();
        let mut sys = MscrSystem::new(g, &cfg, &ones_couplings(2, 3)).unwrap();
        for t in 0..50 {
            let x = sys.step((t as f64).sin()).unwrap();
            assert!(x[3..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn run_sequence_boundaries() {
        let cfg = ReservoirConfig::new(4, 0.9, Activation::Tanh).without_bias();
        let mut sys = scr_single(&cfg, 1.0, &mut SignSource::pi()).unwrap();
        let out = sys.run_sequence(&vec![0.3; 100], 100).unwrap();
        assert_eq!((out.rows(), out.cols()), (0, 4));
        assert!(matches!(
            sys.run_sequence(&[1.0], 2),
            Err(ReservoirError::WashoutTooLong { washout: 2, len: 1 })
        ));

        let mut sys = scr_single(&cfg, 1.0, &mut SignSource::pi()).unwrap();
        let out = sys.run_sequence(&vec![0.0; 50], 5).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_and_run_sequence_agree() {
        let k = 3;
        let n = 6;
        let mut g = MscrGenotype::new(k);
        g.s = vec![0.4, -0.2, 0.1];
        g.d = vec![true, false, true];
        g.a = BitMatrix::from_edges(k, &[(0, 1), (2, 1), (0, 2)]);
        for (i, j) in g.a.clone().edges() {
            g.set_h(i, j, 0.05 * (i + 2 * j) as f64);
        }
        let cfg = ReservoirConfig::new(n, 0.8, Activation::Tanh);
        let couplings = allocate_couplings(&mut SignSource::bernoulli(4), k, n, &BitMatrix::complete(k));
        let inputs: Vec<f64> = (0..40).map(|t| (t as f64 * 0.37).sin()).collect();

        let mut a = MscrSystem::new(g.clone(), &cfg, &couplings).unwrap();
        let batch = a.run_sequence(&inputs, 10).unwrap();
        let mut b = MscrSystem::new(g, &cfg, &couplings).unwrap();
        for (t, &u) in inputs.iter().enumerate() {
            let x = b.step(u).unwrap();
            if t >= 10 {
                for (p, q) in batch.row(t - 10).iter().zip(&x) {
                    assert!((p - q).abs() <= 1e-13 * (1.0 + q.abs()));
                }
            }
        }
        assert_eq!(a.state().len(), 18);
    }

    #[test]
    fn cyclic_genotype_is_repaired() {
        let mut g = MscrGenotype::new(2);
        g.s = vec![1.0, 1.0];
        g.d = vec![true, true];
        g.a = BitMatrix::from_edges(2, &[(0, 1), (1, 0)]);
        let cfg = ReservoirConfig::new(2, 0.5, Activation::Identity);
        let sys = MscrSystem::new(g, &cfg, &ones_couplings(2, 2)).unwrap();
        assert_eq!(sys.topology().removed_edges, vec![(1, 0)]);
        assert_eq!(sys.eval_order(), &[0, 1]);
        assert!(!sys.genotype().a.get(1, 0));
    }

    #[test]
    fn missing_coupling_is_reported() {
        let mut g = MscrGenotype::single(1.0);
        g.k = 2;
        g.s = vec![1.0, 1.0];
        g.h = vec![0.0; 4];
        g.d = vec![true, false];
        g.a = BitMatrix::from_edges(2, &[(0, 1)]);
        let cfg = ReservoirConfig::new(2, 0.5, Activation::Identity);
        let couplings = allocate_couplings(&mut SignSource::pi(), 2, 2, &BitMatrix::new(2));
        assert_eq!(
            MscrSystem::new(g, &cfg, &couplings).unwrap_err(),
            ReservoirError::MissingCoupling { from: 0, to: 1 }
        );
    }

    #[test]
    fn parameter_validation() {
        assert_eq!(ScrParams::new(1.0, vec![1.0], vec![1.0], 0.0, false).unwrap_err(), ReservoirError::InvalidRho(1.0));
        assert_eq!(
            ScrParams::new(0.5, vec![1.0, 0.5], vec![1.0, 1.0], 0.0, false).unwrap_err(),
            ReservoirError::NotASign("input signs")
        );
        assert_eq!(ScrParams::new(0.5, vec![], vec![], 0.0, false).unwrap_err(), ReservoirError::ZeroDimension);
    }

    #[test]
    fn degenerate_ring_of_one() {
        let cfg = ReservoirConfig::new(1, 0.5, Activation::Identity).without_bias();
        let mut sys = scr_single(&cfg, 2.0, &mut SignSource::pi()).unwrap();
        // First π bit is 0 -> sign -1.
        assert_eq!(sys.step(1.0).unwrap(), vec![-2.0]);
        assert_eq!(sys.step(0.0).unwrap(), vec![-1.0]);
    }

    #[test]
    fn identity_overflow_is_flagged() {
        let mut g = MscrGenotype::single(f64::MAX);
        g.s = vec![f64::MAX];
        let cfg = ReservoirConfig::new(2, 0.9, Activation::Identity).without_bias();
        let mut sys = MscrSystem::new(g, &cfg, &ones_couplings(1, 2)).unwrap();
        let err = sys.run_sequence(&[10.0, 10.0], 0).unwrap_err();
        assert_eq!(err, ReservoirError::NonFiniteState { encoder: 0, step: 0 });
    }
}
