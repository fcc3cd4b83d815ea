//! Experiment runner for `folner-core`: config parsing, the built-in scenario
//! registry, single-operation commands and deterministic artifact output.

pub mod commands;
pub mod config;
pub mod output;
pub mod scenarios;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{context}: {source}")]
    Core {
        context: &'static str,
        #[source]
        source: folner_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for malformed input, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_)
            | CliError::Core {
                source: folner_core::Error::Parse(_),
                ..
            } => 2,
            _ => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches the module name to a core error.
pub trait Context<T> {
    fn ctx(self, context: &'static str) -> CliResult<T>;
}

impl<T> Context<T> for folner_core::Result<T> {
    fn ctx(self, context: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context, source })
    }
}
