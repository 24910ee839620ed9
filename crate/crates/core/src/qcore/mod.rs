//! Exact finite-dimensional quantum state and channel algebra.
//!
//! All values are immutable after construction and operations are pure
//! given an explicit random source, so they are safe to share across worker
//! threads with per-worker random streams. Dimensions are intended to stay
//! at or below 16 (four qubits), which keeps the randomized verification
//! sweeps fast.

pub mod linalg;
pub mod ops;
pub mod random;
pub mod types;
pub mod verify;

use thiserror::Error;

pub use linalg::{CMat, CVec};
pub use ops::{
    decompose_instrument, gentle_post_state, measure_qubit_in_basis, stinespring_dilate,
    trace_norm_distance, Basis, QubitSide, StinespringDilation,
};
pub use types::{BellState, DensityMatrix, KrausChannel, MeasurementOperator, QuantumInstrument};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QcoreError {
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace is {trace:.12}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error("spectrum [{min_eigenvalue:.3e}, {max_eigenvalue:.3e}] is outside [0, 1]")]
    NotAnEffect {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },
    #[error("Kraus operators are not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },
    #[error("cannot build an operator from an empty Kraus set")]
    EmptyKrausSet,
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("conditioning on an outcome of probability {probability:.3e}")]
    DegenerateConditioning { probability: f64 },
    #[error("instrument has {n_outcomes} outcomes, requested {outcome}")]
    InvalidOutcome { outcome: usize, n_outcomes: usize },
    #[error("basis index {index} out of range for {m} bases")]
    InvalidBasis { index: u32, m: u32 },
    #[error("expected a two-qubit state, got dimension {dim}")]
    NotTwoQubits { dim: usize },
    #[error("failed to complete the dilation isometry to a unitary")]
    DilationCompletionFailed,
}
