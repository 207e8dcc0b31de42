use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("sample {0} shares no co-observed OTU with any other sample")]
    Isolation(usize),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("graph-constrained completion did not converge after {iterations} iterations (last change {change:e})")]
    Convergence { iterations: usize, change: f64 },

    #[error("empty history: {0}")]
    EmptyHistory(String),

    #[error("degenerate truth: {0}")]
    DegenerateTruth(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable, machine-readable category used by the CLI error stream.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DegenerateData(_) => "degenerate_data",
            Error::Isolation(_) => "isolation",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::Convergence { .. } => "convergence",
            Error::EmptyHistory(_) => "empty_history",
            Error::DegenerateTruth(_) => "degenerate_truth",
            Error::Dimension(_) => "dimension",
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub fn parse(path: impl AsRef<std::path::Path>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.as_ref().display().to_string(), message: message.into() }
    }
}
