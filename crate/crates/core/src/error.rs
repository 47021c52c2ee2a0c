use thiserror::Error;

/// Errors raised by the solvers and constructors of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid exponent p = {0}: must satisfy p >= 1")]
    InvalidExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transform {index} singular (condition number {condition:e})")]
    SingularTransform { index: usize, condition: f64 },

    #[error("outer norm is not absolute: |‖z‖ - ‖sign-flipped z‖| = {gap:e}")]
    NotAbsolute { gap: f64 },

    #[error("empty point set")]
    EmptyPoints,

    #[error("kernel gram matrix not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error(
        "ill-posed problem: measurement matrix on the null space has rank {rank} < {required}; \
         the coercivity bound B·‖p‖ <= ‖ν(p)‖ fails"
    )]
    RankDeficient { rank: usize, required: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear system is singular or numerically ill-conditioned: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
