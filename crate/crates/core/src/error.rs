//! Error type shared by every analysis module.
//!
//! Two failure classes matter downstream: ordinary input problems
//! (`InvalidInput`, parse/IO wrappers), and `Contradiction`, which means the
//! inputs are *internally* inconsistent — e.g. an edit log that proves a
//! snapshot interval is empty. The CLI maps the former to exit code 1 and the
//! latter to exit code 2 so batch drivers can tell them apart.

use std::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The caller handed us something malformed or out of contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The inputs are mutually inconsistent; no answer exists.
    #[error("contradiction: {0}")]
    Contradiction(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Convenience constructor for [`Error::InvalidInput`].
    pub fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidInput(msg.to_string())
    }

    /// Convenience constructor for [`Error::Contradiction`].
    pub fn contradiction(msg: impl fmt::Display) -> Self {
        Error::Contradiction(msg.to_string())
    }

    /// Exit code the CLI should report for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contradiction(_) => 2,
            _ => 1,
        }
    }

    /// Short machine-readable kind tag used in one-line stderr output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Contradiction(_) => "contradiction",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json { .. } => "json",
        }
    }
}
