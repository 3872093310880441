use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("indeterminate divisor: interval contains zero")]
    IndeterminateDivisor,
    #[error("undecidable comparison at height {height} (precision cap {cap} bits)")]
    UndecidableComparison { height: String, cap: u32 },
    #[error("sign undecidable: {0}")]
    Undecidable(String),
    #[error("independence undecidable: {0}")]
    IndependenceUndecidable(String),
    #[error("invalid theta spec `{text}`: {reason}")]
    InvalidTheta { text: String, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("P vanishes on all minimal points ({skipped} records skipped)")]
    PVanishes { skipped: usize },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    #[error("closed form only at critical r")]
    NotCritical,
    #[error("run integrity violation: {0}")]
    RunIntegrity(String),
    #[error("cache mismatch: {0}")]
    CacheMismatch(String),
    #[error("io: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// True for failures that a retry at higher precision may resolve.
    pub fn is_precision_failure(&self) -> bool {
        matches!(
            self,
            Error::IndeterminateDivisor
                | Error::UndecidableComparison { .. }
                | Error::Undecidable(_)
                | Error::IndependenceUndecidable(_)
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
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
