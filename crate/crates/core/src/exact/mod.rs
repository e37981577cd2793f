//! Exact dense dynamics for registers of at most [`ops::MAX_QUBITS`] qubits.

pub mod master;
pub mod noise;
pub mod ops;
pub mod state;
pub mod toric;
pub mod trajectory;
pub mod trotter;

use thiserror::Error;

pub use master::{lindblad_evolve, EvolveOptions};
pub use noise::NoiseModel;
pub use ops::{CMatrix, CVector, LocalOperator, Operator, PauliString, PauliSum, C64};
pub use state::{trace_distance, DensityState, PureState, QuantumState};
pub use toric::{Logical, ToricModel};
pub use trajectory::{accuracy_delta, Observable, Trajectory, TrajectoryRecord};
pub use trotter::{trotter_channel, TrotterPlan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("{n_qubits} qubits exceed the dense budget of {max}", max = ops::MAX_QUBITS)]
    TooLarge { n_qubits: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "integration with dt = {dt} did not converge: halving the step moved results by {delta:e} (tolerance {tol:e})"
    )]
    NonConvergent { dt: f64, delta: f64, tol: f64 },
    #[error("term {index} acts on {weight} qubits; enacted terms are limited to {max}", max = trotter::MAX_TERM_WEIGHT)]
    NonLocalTerm { index: usize, weight: u32 },
    #[error("gate noise component with support {support:#b} fits inside no enacted term")]
    NonLocalNoise { support: u64 },
    #[error("observable sets differ: {left:?} vs {right:?}")]
    MismatchedObservables { left: Vec<String>, right: Vec<String> },
    #[error("no sample at t = {time}")]
    MissingSample { time: f64 },
}
