use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("capacity exceeded: {needed} states needed, capacity is {capacity}")]
    CapacityExceeded { needed: usize, capacity: usize },

    #[error("inconclusive estimate: {0}")]
    InconclusiveEstimate(String),

    /// Both walkers are frozen and start apart, so they never meet.
    #[error("walkers never meet: both speeds are zero and the start states differ")]
    DegenerateNoMeeting,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported chain file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::SolverFailure(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::HypothesisViolation(msg.into())
    }
}
