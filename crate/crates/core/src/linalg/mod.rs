//! Dense linear algebra: storage, products, factorizations and solvers.

mod eigen;
mod lu;
mod matrix;
mod schur;
mod svd;
mod sylvester;

use thiserror::Error;

pub use eigen::{sym_eigen, SymEigen, SYMMETRY_TOL};
pub use lu::{solve_linear, Lu};
pub use matrix::{matmul, matmul_nt, matmul_tn, Matrix};
pub use schur::{schur, SchurDecomposition};
pub use svd::{svd_thin, Svd};
pub use sylvester::{solve_sylvester, sylvester_residual, SylvesterSolver, RESIDUAL_TOL};

pub(crate) use matrix::{axpy, dot};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("data length {actual} does not match shape ({expected} entries)")]
    BadLength { expected: usize, actual: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(
        "eigenvalue collision between block {i} of A (λ≈{lambda_a:.3e}) and block {j} of B \
         (λ≈{lambda_b:.3e}): λ_a + λ_b ≈ 0 with an inconsistent right-hand side"
    )]
    EigenvalueCollision {
        i: usize,
        j: usize,
        lambda_a: f64,
        lambda_b: f64,
    },
    #[error("matrix is singular to working precision (condition estimate {condition_estimate:.3e})")]
    Singular { condition_estimate: f64 },
    #[error("solution residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
}
