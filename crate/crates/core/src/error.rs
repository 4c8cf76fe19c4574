use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("constraint matrix is rank deficient ({0})")]
    RankDeficient(String),

    #[error("conjugate gradient stalled after {iterations} iterations: residual {residual:.3e} > tolerance {tolerance:.3e}")]
    CgStalled {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("line search exceeded {0} backtracks")]
    MaxBacktracks(usize),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("non-finite value from component {index}")]
    NonFinite { index: usize },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("labels: {0}")]
    Label(String),

    #[error("invariant violated at iteration {k}: {message}")]
    InvariantViolated { k: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
