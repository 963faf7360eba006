use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("{name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("equation family {family} is inconsistent with depth {depth}")]
    FamilyDepthMismatch { family: String, depth: String },

    #[error("frequency tuple {0:?} does not sum to zero")]
    NonZeroSum(Vec<i64>),

    #[error("solution blew up at t = {time} (last healthy snapshot at t = {last_healthy})")]
    BlowUp { time: f64, last_healthy: f64 },

    #[error("sweep aborted: run at delta = {delta} failed: {source}")]
    SweepRun {
        delta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no snapshot at t = {0} in the source trajectory")]
    MissingSnapshot(f64),

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
