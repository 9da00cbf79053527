use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate ({x}, {y}) lies outside the tabulated medium")]
    OutOfDomain { x: f64, y: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A stepping call was made out of order (e.g. advancing before the
    /// boundary columns were filled, or accumulating twice for one step).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("instability at step {step}: max|u| = {max_abs}")]
    Unstable { step: usize, max_abs: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("config key `{key}`: {reason}")]
    ConfigKey { key: String, reason: String },

    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn key(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigKey {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
