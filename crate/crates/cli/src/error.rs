use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] selex_core::Error),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("stage '{stage}' failed (config {config_hash}): {source}")]
    Stage {
        stage: &'static str,
        config_hash: String,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Short category name, also reported on stderr.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                selex_core::Error::Config(_) => "config",
                selex_core::Error::Validation(_) => "validation",
                selex_core::Error::Domain(_) => "domain",
                selex_core::Error::Numeric(_) => "numeric",
                selex_core::Error::Usage(_) => "usage",
            },
            CliError::Parse { .. } => "config",
            CliError::Invalid(_) => "validation",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Stage { source, .. } => source.category(),
        }
    }

    /// Process exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "config" => 3,
            "validation" => 4,
            "domain" => 5,
            "numeric" => 6,
            _ => 7,
        }
    }
}
