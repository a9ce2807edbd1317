use thiserror::Error;

use normsol_core::Error as CoreError;

use crate::config::Origin;

/// Failures of a command, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error: missing required key `{0}`")]
    MissingKey(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(origin: &Origin, key: Option<&str>, msg: String) -> Self {
        match key {
            Some(k) => CliError::Config(format!("{origin}: `{k}`: {msg}")),
            None => CliError::Config(format!("{origin}: {msg}")),
        }
    }

    /// 2 for configuration, hypothesis and I/O problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParams(_) | CoreError::Parse(_) => CliError::Config(e.to_string()),
            CoreError::Hypothesis(_)
            | CoreError::NoPositiveWindow
            | CoreError::GeometryNotGuaranteed { .. } => CliError::Hypothesis(e.to_string()),
            CoreError::Io(msg) => CliError::Io(msg),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
