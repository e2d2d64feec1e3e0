use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum SgpeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field blow-up at tau = {tau:.6}: max |F|^2 = {max_density:.3e} exceeds {threshold:.3e}")]
    BlowUp {
        tau: f64,
        max_density: f64,
        threshold: f64,
    },

    #[error("non-finite field amplitude at tau = {tau:.6}")]
    NonFinite { tau: f64 },

    #[error("no soliton found: {0}")]
    NoSoliton(String),

    #[error("ambiguous soliton detection: {0}")]
    AmbiguousSoliton(String),

    #[error("root solve failed: {0}")]
    RootSolve(String),

    #[error("insufficient ensemble: {got} realizations, need at least {need}")]
    InsufficientEnsemble { got: usize, need: usize },

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, SgpeError>;

impl From<serde_json::Error> for SgpeError {
    fn from(e: serde_json::Error) -> Self {
        SgpeError::Serde(e.to_string())
    }
}

impl From<toml::de::Error> for SgpeError {
    fn from(e: toml::de::Error) -> Self {
        SgpeError::Config(e.to_string())
    }
}
