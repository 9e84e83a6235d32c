//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid action index {index} for player {player}")]
    InvalidAction { player: usize, index: usize },

    #[error("joint action space too large for exact enumeration: {size} > cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("resource {resource} is not covered by any strategy")]
    NotCoverable { resource: usize },

    #[error("atom pruning failed: affine dependency solve is degenerate")]
    DecompositionUnstable,

    #[error("gradient direction contains NaN")]
    InvalidGradient,

    #[error("sampling probability is zero at coordinate {coord}")]
    DivisionByZeroProb { coord: usize },

    #[error("second-moment matrix is identically zero")]
    DegenerateDistribution,

    #[error("played vector lies outside the sampling row space (residual {residual:.3e})")]
    EstimatorInconsistent { residual: f64 },

    #[error("iterative solver failed to converge within {max_iters} iterations")]
    NoConvergence { max_iters: usize },

    #[error("numerical divergence: {0}")]
    NumericalDivergence(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI. Config and validation problems map to 2,
    /// numerical divergence to 3, everything else to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::ShapeMismatch(_)
            | Error::ParameterOutOfRange(_)
            | Error::InvalidAction { .. } => 2,
            Error::NumericalDivergence(_) => 3,
            _ => 1,
        }
    }
}
