//! Error type of the command-line tool and its mapping to exit codes.

use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration, flags or inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation produced an unusable result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An audit found violations and `--strict` was set.
    #[error("audit violation: {0}")]
    AuditViolation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Io { .. } => ExitCode::from(2),
            CliError::Numeric(_) => ExitCode::from(3),
            CliError::AuditViolation(_) => ExitCode::from(4),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<alpha_lab::Error> for CliError {
    fn from(e: alpha_lab::Error) -> Self {
        use alpha_lab::Error as E;
        match e {
            E::Domain(_) | E::Singular(_) | E::Numeric(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
