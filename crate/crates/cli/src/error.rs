use thiserror::Error;

/// Failure categories, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(floquet_aah::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<floquet_aah::Error> for CliError {
    fn from(e: floquet_aah::Error) -> Self {
        use floquet_aah::Error as E;
        match e {
            E::InvalidParams(_) | E::NotFibonacci { .. } | E::TooFewPoints { .. } | E::IndexOutOfRange { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}
