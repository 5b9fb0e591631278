//! Crate-wide error type. Every variant renders as a single
//! machine-parsable line: `<kind>: <detail>`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid setting: {0}")]
    InvalidSetting(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid alpha: {0}")]
    InvalidAlpha(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("too large: {0}")]
    TooLarge(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("no array: {0}")]
    NoArray(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
