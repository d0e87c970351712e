use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] horoflow::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 for bad configuration, 3 for a numerical precondition, 4 for a
    /// broken invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Library(e) if e.is_internal() => 4,
            CliError::Library(_) => 3,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_invalid",
            CliError::Io { .. } => "output_unwritable",
            CliError::Library(e) if e.is_internal() => "internal_invariant",
            CliError::Library(_) => "numerical_precondition",
        }
    }
}
