use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unresolved on grid: {0}")]
    Unresolved(String),

    #[error("outside the 2 <= delta^-eps regime: delta^eps = {0}")]
    Regime(f64),

    #[error("band limit violated: {0}")]
    BandLimit(String),

    #[error("tolerance violated: {0}")]
    Tolerance(String),

    #[error("need ≥ {needed} points for a fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
