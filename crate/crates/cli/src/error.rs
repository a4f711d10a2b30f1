use std::fmt;
use std::process::ExitCode;

/// A failed command, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or an invalid experiment spec (exit 1).
    Usage(String),
    /// Unreadable or invalid input data (exit 2).
    Data(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(err: impl Into<anyhow::Error>) -> Self {
        CliError::Data(err.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Data(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(err) => write!(f, "{err:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Data(err)
    }
}

pub type CliResult<T> = Result<T, CliError>;
