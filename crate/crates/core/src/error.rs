//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A†| = {max_dev:.3e}")]
    NonHermitian { max_dev: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("non-diagonalizable operator: {detail}")]
    NonDiagonalizable { detail: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown subsystem label `{0}`")]
    UnknownSubsystem(String),

    #[error("unknown state label `{label}` for subsystem `{subsystem}`")]
    UnknownStateLabel { subsystem: String, label: String },

    #[error("yield underflow: conditional state undefined beyond N = {last_valid}")]
    YieldUnderflow { last_valid: usize },

    #[error("dominant eigenvalue is not unique (relative gap {gap:.3e})")]
    NonUniqueDominant { gap: f64 },

    #[error("iteration did not converge within {max_steps} steps")]
    NotConverged { max_steps: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sector index {k} out of range 1..={k_max}")]
    SectorOutOfRange { k: usize, k_max: usize },

    #[error("swap condition not met: |sin(g_A t_A)| = {value}, need 1 within {tol:.0e}")]
    SwapConditionNotMet { value: f64, tol: f64 },

    #[error("internal consistency failure: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
