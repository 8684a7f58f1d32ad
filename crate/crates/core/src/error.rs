use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Sphere projection of the origin is undefined.
    #[error("cannot project the zero vector onto a sphere")]
    ZeroInput,
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
    /// The constraint Jacobian violates the LICQ floor at the evaluation point.
    #[error("constraint Jacobian is rank deficient: smallest singular value {sigma_min:e} below {floor:e}")]
    RankDeficiency { sigma_min: f64, floor: f64 },
    #[error("invalid constants: {0}")]
    InvalidConstants(&'static str),
    #[error("matrix is not symmetric (largest asymmetry {0:e})")]
    Asymmetry(f64),
    #[error("invalid max-cut weights: {0}")]
    InvalidWeights(&'static str),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("point has non-finite coordinates")]
    NonFinite,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
