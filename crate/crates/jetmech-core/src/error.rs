//! Error type shared by all core operations.

use alloc::string::String;
use thiserror::Error;

use crate::space::SpaceId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("point lives in {got:?} but {context} expects {expected:?}")]
    WrongSpace {
        context: &'static str,
        expected: SpaceId,
        got: SpaceId,
    },

    #[error("singular Lagrangian: velocity Hessian is degenerate at the requested point")]
    SingularLagrangian,

    #[error("Newton iteration for the inverse Legendre transform did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular linear system in {context}")]
    SingularSystem { context: &'static str },

    #[error("trajectory index {index} out of range (interior indices are 1..{last})")]
    IndexOutOfRange { index: usize, last: usize },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("immersion is rank deficient at a tested point (rank {rank} < {param_dim})")]
    ImmersionRankDeficient { rank: usize, param_dim: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T> = core::result::Result<T, CoreError>;
