use thiserror::Error;

/// Errors raised across the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Bessel order {0} outside supported range 0..={max}", max = crate::specialfun::MAX_ORDER)]
    OrderOutOfRange(i64),

    #[error("argument {0} outside the domain of {1}")]
    Domain(f64, &'static str),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parameters rejected: {0}")]
    MeshParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is near singular (pivot {pivot:.3e} at step {step}, threshold {threshold:.3e})")]
    NearSingular {
        step: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("Gram matrix is not Hermitian positive definite (failed at column {0})")]
    NotPositiveDefinite(usize),

    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate:.3e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("nodes must be strictly increasing (index {0})")]
    UnsortedNodes(usize),

    #[error("negative energy-norm radicand {0:.3e}")]
    NegativeEnergy(f64),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
