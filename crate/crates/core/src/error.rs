use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is unsupported or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data has the wrong shape or length.
    #[error("input error: {0}")]
    Input(String),
    /// A numeric argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The input carries no signal at some scale (e.g. a constant or linear series).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("variogram fit did not converge after {iterations} iterations (best objective {best_objective:e}): {message}")]
    Fit {
        message: String,
        iterations: usize,
        best_objective: f64,
    },
    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category, used in run manifests.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Input(_) => "input",
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::Degenerate(_) => "degenerate",
            Error::Fit { .. } => "fit",
            Error::Data { .. } => "data",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
