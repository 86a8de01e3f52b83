//! Simulation library for distillation of entangled states by repeated
//! conditional measurements on a mediator.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`linalg`] — dense complex arithmetic, Hermitian matrix exponentials,
//!   and biorthogonal spectral decomposition of non-Hermitian operators;
//! - [`protocol`] — a line-oriented language for prepare/interact/free/project
//!   sequences, compiled against a model into an effective cycle operator;
//! - [`engine`] — conditional iteration, yield/fidelity tracking, and
//!   asymptotics of the distilled state;
//! - [`qubit`] — the three-qubit mediator model with closed-form parity
//!   blocks and the optimal-eigenvalue condition solver;
//! - [`cavity`] — the two-cavity Jaynes–Cummings model with excitation-sector
//!   analysis and the vacuum-preparation pre-protocol;
//! - [`appendix`] — tridiagonal determinant identities cross-validating the
//!   sector spectra.
//!
//! ```
//! use zdistill_core::{asymptotics, iterate, CMatrix, DensityMatrix};
//! use num_complex::Complex64;
//!
//! // a contracting effective operator with an isolated dominant eigenvalue
//! let v = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
//!     Complex64::new(0.9, 0.0),
//!     Complex64::new(0.2, 0.0),
//! ]));
//! let rho0 = DensityMatrix::maximally_mixed(2);
//! let report = asymptotics(&v, &rho0).unwrap();
//! assert!(report.unique && !report.optimal);
//!
//! // conditioning drives the state onto the dominant eigenvector
//! let trace = iterate(&v, &rho0, 20, &report.target).unwrap();
//! assert!(trace.last().fidelity > 1.0 - 1e-12);
//! ```

pub mod appendix;
pub mod cavity;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod qubit;

pub use engine::{
    asymptotics, convergence_steps, iterate, AsymptoticReport, DensityMatrix, IterationTrace,
    PureState, TraceRow,
};
pub use error::{Error, Result};
pub use linalg::{
    hermitian_matexp, power_apply, spectral_decompose, CCovector, CMatrix, CVector,
    HermitianOperator, SpectralData,
};
pub use protocol::{compile_cycle, parse_program, CompiledCycle, EffectiveOperator, ModelBinding,
    ProtocolProgram, ProtocolStep};
