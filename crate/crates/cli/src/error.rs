use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] simplex_bernstein::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code: every error is a usage or setup failure (2);
    /// tolerance failures are not errors and exit with 1.
    pub fn exit_code(&self) -> u8 {
        2
    }

    pub fn is_config(&self) -> bool {
        matches!(self, CliError::Config(_))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
