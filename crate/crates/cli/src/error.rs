use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("unknown setting `{0}`")]
    UnknownKey(String),

    #[error("invalid value {value:?} for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },

    #[error("{0}")]
    Validation(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{failed} verification checks failed")]
    Verification { failed: usize },

    #[error(transparent)]
    Core(#[from] pit_core::Error),
}

impl CliError {
    /// 1 for invalid input, 2 for numerical breakdown, 3 for failed checks.
    pub fn exit_code(&self) -> u8 {
        use pit_core::Error as E;
        match self {
            CliError::Verification { .. } | CliError::Core(E::DiscrepancyContract(_)) => 3,
            CliError::Core(
                E::NonPositivePivot { .. } | E::SvdNotConverged { .. } | E::GkbBreakdown | E::NonFinite { .. },
            ) => 2,
            _ => 1,
        }
    }

    pub fn invalid(key: &str, value: &str, reason: impl Into<String>) -> Self {
        CliError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}
