use std::path::Path;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),

    /// Syntax errors, unknown or missing fields.
    #[error("parse error: {0}")]
    Parse(String),

    /// Well-formed but inconsistent data, such as mismatched dimensions.
    #[error("invalid problem: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] mpcc_core::Error),
}

impl CliError {
    pub(crate) fn json(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }

    pub(crate) fn invalid(e: mpcc_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
            other => other,
        }
    }
}
