//! Dense complex linear algebra: the matrix type, Hermitian
//! eigendecomposition, and functions of Hermitian and unitary matrices.

mod eigen;
mod matrix;
mod unitary;

use thiserror::Error;

pub use eigen::{eig_hermitian, eig_hermitian_with, EigenDecomposition, DEGENERACY_GAP};
pub use matrix::{sigma_x, ComplexMatrix};
pub use unitary::{
    log_unitary, log_unitary_with, lu_solve, unitary_from_hermitian_exponent, wrap_phase,
    UnitaryLog,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M†| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max |U†U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("eigensolver did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("matrix is singular to working precision")]
    Singular,
}

/// Acceptance thresholds for the kernel's input checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed `max |M - M†|` relative to `max |M|`.
    pub hermiticity: f64,
    /// Allowed `max |U†U - I|` for inputs to the unitary logarithm.
    pub unitarity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-12, unitarity: 1e-10 }
    }
}
