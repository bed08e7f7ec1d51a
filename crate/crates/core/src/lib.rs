//! Noise-aware qubit mapping and routing.
//!
//! The crate places a logical circuit onto a device whose qubits and couplers
//! carry calibrated error rates, choosing initial placement, gate order and
//! SWAP insertion so the estimated success probability (ESP, the product of
//! `1 - error` over every executed operation) of the compiled circuit is as
//! high as possible.
//!
//! Module map:
//!
//! - [`circuit`]: gate-level circuits, the text format, gate dependencies and
//!   the Cuccaro ripple-carry adder benchmark.
//! - [`sim`]: dense statevector / unitary simulation used as an oracle.
//! - [`device`]: coupling graphs with error rates, ESP and most-reliable paths.
//! - [`remote`]: alternative realizations of a CNOT between distant qubits.
//! - [`mapper`]: beam-search compiler, initial mappings and the random baseline.
//! - [`evaluator`]: ideal and noisy output distributions, KL divergence and the
//!   ESP-vs-KL experiment driver.
//! - [`select`]: Floyd-Rivest selection used to prune search states.

pub mod circuit;
pub mod device;
pub mod evaluator;
pub mod mapper;
pub mod remote;
pub mod select;
pub mod sim;

pub use circuit::{Circuit, CircuitError, Gate, GateKind};
pub use device::{DeviceError, DeviceModel, PathTable};
pub use mapper::{CompiledCircuit, CompilerConfig, Mapping, MapperError};

/// Any error produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Parse(#[from] circuit::ParseError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Remote(#[from] remote::RemoteError),
    #[error(transparent)]
    Mapper(#[from] MapperError),
    #[error(transparent)]
    Evaluator(#[from] evaluator::EvalError),
}
