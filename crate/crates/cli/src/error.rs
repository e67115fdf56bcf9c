use smashline::SmashError;

/// Failure of a CLI run, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) | Self::Io(_) | Self::Csv(_) | Self::Json(_) => 2,
            Self::Invariant(_) => 3,
            Self::Numerical(_) => 4,
        }
    }
}

impl From<SmashError> for CliError {
    fn from(e: SmashError) -> Self {
        match e {
            SmashError::Instability { .. } | SmashError::BoundaryMass { .. } => Self::Numerical(e.to_string()),
            other => Self::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
