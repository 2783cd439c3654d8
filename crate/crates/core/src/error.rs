use thiserror::Error;

use crate::model::ValidationReport;

/// Errors raised by model construction, enumeration, identification and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model:\n{0}")]
    InvalidModel(ValidationReport),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate stratum: {0}")]
    DegenerateStratum(String),

    #[error("unit space has {units} configurations, exceeding the cap of {cap}")]
    SizeLimit { units: u128, cap: u128 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("reproduction failure: {0}")]
    Reproduction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
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

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
