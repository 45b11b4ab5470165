use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse category used by the command line for exit codes and manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorCategory {
    Config,
    Resource,
    Ambiguity,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("block of {len} entries exceeds capacity {capacity}")]
    BlockCapacity { len: u64, capacity: u64 },

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("floor/frac branch at n = {n} still ambiguous at {bits} bits")]
    AmbiguousBranch { n: i64, bits: u32 },

    #[error("expression declared integer-valued is not an integer at n = {n}")]
    IntegralityViolation { n: i64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("cache file is malformed: {0}")]
    Cache(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Argument(_)
            | Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::Validation(_)
            | Error::IntegralityViolation { .. }
            | Error::Config(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorCategory::Config,
            Error::BlockCapacity { .. } | Error::Resource(_) => ErrorCategory::Resource,
            Error::AmbiguousBranch { .. } => ErrorCategory::Ambiguity,
            Error::Cache(_) | Error::Internal(_) | Error::Io(_) => ErrorCategory::Internal,
        }
    }
}

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
