use thiserror::Error;

/// Errors raised across the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("point x = {x} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    /// The monotone root-finder could not bracket a solution. Cannot occur for
    /// catalog functions evaluated inside their domain closure.
    #[error("internal error: root bracket failure ({0})")]
    Bracket(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("trace integrity: {0}")]
    TraceIntegrity(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
