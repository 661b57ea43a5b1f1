use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate 6D rotation: {0}")]
    DegenerateRotation(String),

    #[error("matrix is not a rotation (orthonormality error {orthonormality:.3e}, det {determinant:.6})")]
    NotARotation { orthonormality: f64, determinant: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sequence too short: need at least {needed} frames, got {found}")]
    TooShort { needed: usize, found: usize },

    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("interpenetration needs at least two persons")]
    SinglePerson,

    #[error("covariance is rank deficient (smallest eigenvalue {min_eigenvalue:.3e})")]
    RankDeficient { min_eigenvalue: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
