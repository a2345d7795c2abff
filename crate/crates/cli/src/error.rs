use datawave::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("rerun differs from the recorded run: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Lib(#[from] datawave::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Mismatch(_) => 4,
            CliError::Lib(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numeric => 4,
                ErrorKind::Infeasible => 5,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
