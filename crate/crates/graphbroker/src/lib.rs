//! Stabilizer-exact simulation of broker-client graph-state growth.
//!
//! Each physical node carries two qubits: a disposable *broker* used to
//! negotiate entanglement through a heralded, probabilistic link, and a
//! long-lived *client* that stores the growing graph state. Brokers first
//! assemble a graph fragment among themselves (retrying on heralded
//! failures, which never touch the clients), and a completed fragment is
//! then mapped onto the clients by one deterministic local circuit and a
//! broker measurement. The crate provides:
//!
//! - an exact bit-packed stabilizer tableau with a dense state-vector
//!   oracle for cross-validation ([`tableau`], [`statevector`]),
//! - graph-state canonicalization up to per-vertex Cliffords ([`graph`]),
//! - the broker/client protocol state machine ([`protocol`]),
//! - closed-form build-time models and strategy selection ([`timing`]),
//! - fragment planning over arbitrary target graphs ([`plan`]),
//! - seeded Monte Carlo execution with per-trial event logs ([`sim`]),
//! - the self-check suite behind the CLI `validate` command
//!   ([`validation`]).
//!
//! Monte Carlo trials are embarrassingly parallel; with the default
//! `parallel` feature they fan out over a rayon pool, and
//! [`sim::run_monte_carlo_serial`] provides the single-threaded path.

pub mod clifford;
pub mod events;
pub mod gf2;
pub mod graph;
pub mod pauli;
pub mod plan;
pub mod protocol;
pub mod rng;
pub mod sim;
pub mod statevector;
pub mod tableau;
pub mod timing;
pub mod validation;

pub use clifford::LocalClifford;
pub use events::{Event, EventKind, EventLog, Herald};
pub use graph::AdornedGraph;
pub use pauli::{Axis, PauliString, Sign};
pub use plan::{plan_growth, Blueprint, BuildPlan};
pub use protocol::{MeasurementBasis, Network, TransferFlavor};
pub use rng::SimRng;
pub use sim::{
    compare_strategies, run_monte_carlo, run_monte_carlo_serial, run_trial, RunStats, SimOptions,
};
pub use tableau::{Gate, InitialBasis, StabilizerTableau};
pub use timing::{ParallelMode, StrategyChoice, TimingProfile};
