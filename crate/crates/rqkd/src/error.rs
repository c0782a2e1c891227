//! Error type shared across the pipeline. Parsing and numerical failures are
//! values, never panics.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("all stochastic weights vanish; cannot form a distribution")]
    DegenerateWeights,

    #[error("canonical orthogonalization retained no directions (threshold {threshold:e})")]
    DegenerateSubspace { threshold: f64 },

    #[error("system too large for this operation: {0}")]
    SizeGuard(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
