use thiserror::Error;

/// Everything that makes a command refuse its input. All map to exit code 2;
/// a check that runs and fails is reported through [`crate::Outcome`] instead.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] complementarity::Error),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("{0}")]
    Io(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid argument: {0}")]
    Argument(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
