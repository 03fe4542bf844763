use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Input { path: String, msg: String },

    #[error("invalid input: {0}")]
    Param(String),

    #[error(transparent)]
    Core(#[from] pmc_helix::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Input {
            path: path.display().to_string(),
            msg: msg.into(),
        }
    }

    pub fn param(msg: String) -> Self {
        CliError::Param(msg)
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for numerical failures, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(pmc_helix::Error::Integration { .. }) => 1,
            _ => 2,
        }
    }
}
