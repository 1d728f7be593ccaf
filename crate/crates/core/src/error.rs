use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("invalid element literal `{literal}` for {group}: {reason}")]
    ElementLiteral { literal: String, group: String, reason: String },

    #[error("invalid weight literal `{0}`")]
    WeightLiteral(String),

    #[error("{what} exceeded cap of {limit}")]
    CapExceeded { what: &'static str, limit: usize },

    #[error("word enumeration limited to n <= {guard} (requested {requested}); pass an explicit override")]
    GuardExceeded { guard: usize, requested: usize },

    #[error("measure is not self-adjoint")]
    NotSelfAdjoint,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("normalization violated: {0}")]
    Normalization(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
