use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI exit-status contract: argument and
/// precondition failures are validation errors, loss of positive
/// definiteness during rule construction is a numerical breakdown.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("partition {0} is crossing")]
    CrossingPartition(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("{what} needs {needed} entries but only {available} were provided")]
    Insufficient {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("Hankel breakdown at order {order}: {detail}")]
    HankelBreakdown { order: usize, detail: String },

    #[error("no bracket found for {0} in [-30, 60] dB")]
    NoBracket(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("matrix dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by finite precision rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::HankelBreakdown { .. } | Error::NonFinite(_) | Error::NoBracket(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
