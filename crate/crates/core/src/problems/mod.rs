//! LASSO and ℓ1-regularized logistic regression.

pub mod io;
mod lasso;
mod logistic;
mod matrix;
pub mod synthetic;

pub use io::{load_dense_csv, load_libsvm, LoadError};
pub use lasso::LassoProblem;
pub use logistic::{sigmoid, softplus, LogisticProblem};
pub use matrix::{CsrMatrix, DesignMatrix, MatrixError};
pub use synthetic::{synthetic_lasso, synthetic_logistic, Synthetic};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ProblemError {
    #[error("expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ν > 0 violated (ν = {0})")]
    NuNotPositive(f64),
    #[error("label {0} is not ±1")]
    BadLabel(f64),
    #[error("non-finite data")]
    NonFinite,
}

/// Distance from 0 to `g + ν ∂|·|(x)` for one coordinate.
pub fn l1_kkt_component(g: f64, x: f64, nu: f64) -> f64 {
    if x != 0.0 {
        (g + nu * x.signum()).abs()
    } else {
        (g.abs() - nu).max(0.0)
    }
}
