use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Compute(#[from] fcf_core::Error),

    #[error("{0}")]
    Format(String),
}

impl CliError {
    /// Stable machine-readable category, used as the prefix of CLI error lines.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Validation { .. } => "validation",
            CliError::Compute(fcf_core::Error::TooLarge { .. })
            | CliError::Compute(fcf_core::Error::PatternTooLarge { .. }) => "budget",
            CliError::Compute(_) => "compute",
            CliError::Format(_) => "format",
        }
    }

    /// `error[<code>]: <message>` on a single line.
    pub fn one_line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.code(), msg.split_whitespace().collect::<Vec<_>>().join(" "))
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
