//! Dense matrix kernels, ZOH discretization, the discrete Riccati solve,
//! small-matrix eigenvalues and closed-loop stability certificates.

mod dare;
mod eigen;
mod expm;
mod matrix;
mod stability;

pub use dare::{dare_rhs, solve_dare, solve_dare_with, DareMethod, DareOptions, DareSolution};
pub use eigen::{characteristic_polynomial, eigenvalues, eigenvalues_with, EigenOptions};
pub use expm::{expm, zoh_discretize, DiscretizedSystem};
pub use matrix::Matrix;
pub use stability::{certify_stability, spectral_radius, StabilityCertificate, StabilityKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("{what} must be square, got {rows}x{cols}")]
    NotSquare {
        what: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{what} contains non-finite entries")]
    NonFinite { what: &'static str },
    #[error("matrix is singular")]
    Singular,
    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },
    #[error("{what} is not symmetric positive semidefinite")]
    NotPositiveSemidefinite { what: &'static str },
    #[error("{what}: no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
