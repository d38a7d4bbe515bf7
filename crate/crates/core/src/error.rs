use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("bidder index {index} out of range for {n} bidders")]
    BidderIndex { index: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("outcome is not a pacing equilibrium: {0}")]
    NotEquilibrium(String),
    #[error("outcome is not a competitive equilibrium: {0}")]
    NotCompetitive(String),
    #[error("malformed formula: {0}")]
    Formula(String),
    #[error("constraint `{constraint}` violated by {residual:.3e}")]
    Residual { constraint: String, residual: f64 },
    #[error("solver: {0}")]
    Solver(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
