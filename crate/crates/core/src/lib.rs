//! Multiple simple cycle reservoirs (MSCR) for time-series prediction.
//!
//! A simple cycle reservoir is a ring of `n` units with a single contraction
//! factor and ±1 input signs. An MSCR wires `k` of them into a directed
//! acyclic graph; which encoders see the external input (`d`), which feed
//! which (`A`), and how strongly (`s`, `H`) are searched with particle swarm
//! optimization. A ridge readout on the concatenated state produces the
//! prediction.
//!
//! Module map:
//! - [`reservoir`]: ring dynamics, multi-encoder stepping, state collection
//! - [`topology`]: reachability, validity/rank, DAG repair, evaluation order
//! - [`signs`]: π-expansion and Bernoulli sign streams, coupling allocation
//! - [`readout`]: ridge regression and RMSE
//! - [`datasets`]: Mackey–Glass, NARMA-10, sunspot loader, task splits
//! - [`optimizer`]: PSO, the GA baseline, fitness evaluation
//! - [`harness`]: experiment configs, trials, reports, artifacts, DOT export

pub mod datasets;
pub mod exec;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod readout;
pub mod reservoir;
pub mod signs;
pub mod topology;

pub use exec::Exec;
pub use linalg::Matrix;
pub use reservoir::{scr_single, Activation, MscrGenotype, MscrSystem, ReservoirConfig, ReservoirError};
pub use signs::{allocate_couplings, pi_fraction_bits, Couplings, SignMode, SignSource};
pub use topology::{closure, fixed_topology, rank_and_validity, repair_dag, topo_order, BitMatrix, FixedTopology};
