use std::path::PathBuf;

use thiserror::Error;

/// Exit code for invalid configuration or parameters.
pub const EXIT_INVALID: i32 = 2;
/// Exit code when output cannot be written.
pub const EXIT_OUTPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] ssrbell::Error),

    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output { .. } => EXIT_OUTPUT,
            _ => EXIT_INVALID,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
