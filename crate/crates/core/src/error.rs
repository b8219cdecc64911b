use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed observable: {0}")]
    MalformedObservable(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (defect {defect:.3e} exceeds tolerance)")]
    NonHermitian { defect: f64 },

    #[error("operator is not a state: eigenvalue {eigenvalue:.3e} below -1e-10")]
    NotAState { eigenvalue: f64 },

    #[error("truncation cap {dim_cap} too small: required dimension {required_dim}, achieved tail mass {achieved_tail:.3e}")]
    Truncation {
        dim_cap: usize,
        required_dim: usize,
        achieved_tail: f64,
    },

    #[error("quadrature did not converge: achieved tolerance {achieved:.3e}, requested {requested:.3e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("relative entropy diverges: {0}")]
    InfiniteRelativeEntropy(String),

    #[error("KL divergence undefined: {0}")]
    KlDivergence(String),

    #[error("numerics check failed: {0}")]
    Numerics(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },
}

pub type Result<T> = std::result::Result<T, Error>;
