use thiserror::Error;

/// Errors produced by the library. Every variant maps onto one CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input document or structurally invalid object.
    #[error("parse error: {0}")]
    Parse(String),

    /// A precondition on the arguments was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An enumeration would exceed its configured size cap.
    #[error("{what}: {requested} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    /// Exact block counts would exceed the decimal digit budget.
    #[error("exact count at level {level} needs ~{digits} decimal digits (budget {budget})")]
    DigitBudget {
        level: usize,
        digits: u64,
        budget: u64,
    },

    /// Template parameters lie on a partition line; the basic set is not defined there.
    #[error("parameter lies on a region boundary: {0}")]
    BoundaryParameter(String),

    /// Two independent computations disagreed.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("i/o error: {0}")]
    Io(String),
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

pub type Result<T> = std::result::Result<T, Error>;

/// Default enumeration cap, overridable with `CAYLEY_ENTROPY_CAP`.
pub fn cap_from_env(default: u128) -> u128 {
    std::env::var("CAYLEY_ENTROPY_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

pub(crate) fn check_cap(what: &'static str, requested: u128, cap: u128) -> Result<()> {
    if requested > cap {
        Err(Error::CapExceeded {
            what,
            requested,
            cap,
        })
    } else {
        Ok(())
    }
}
