//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("empty population")]
    EmptyPopulation,

    #[error("plan shape mismatch between candidates")]
    ShapeMismatch,

    #[error("all rollouts failed")]
    AllRolloutsFailed,

    #[error("unresolved site `{0}`")]
    MissingSite(String),

    #[error("unknown task id `{id}`; valid ids: {valid}")]
    UnknownTask { id: String, valid: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
