use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{location}: {message}")]
    Config { location: String, message: String },
    #[error("{location}: {message}")]
    Validation { key: String, location: String, message: String },
    #[error(transparent)]
    Core(#[from] conebessel::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Validation { .. } => "validation",
            CliError::Core(_) => "computation",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
