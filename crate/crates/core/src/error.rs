use thiserror::Error;

/// Errors raised by the numerical kernels and the physical models built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} out of supported range")]
    BadDimension(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid joint-measurability instance: {0}")]
    InvalidInstance(String),

    #[error("observables are not jointly measurable (margin {0:e})")]
    NotMeasurable(f64),

    #[error("direction is undefined (vector norm {0:e})")]
    DegenerateDirection(f64),

    #[error("fidelity {0:e} too small for the slope coefficient")]
    DegenerateFidelity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
