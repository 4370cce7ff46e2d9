use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lower bound {lo} exceeds upper bound {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("agent population is empty")]
    EmptyPopulation,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("sample variance is zero; moment is undefined")]
    ZeroVariance,

    #[error("lag {lag} must be smaller than series length {len}")]
    LagTooLarge { lag: usize, len: usize },

    #[error("tail holds {got} samples, at least {needed} required")]
    InsufficientTail { needed: usize, got: usize },

    #[error("window of {window} steps exceeds series of {len} steps")]
    WindowTooLong { window: usize, len: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error in {file}: {reason}")]
    Format { file: String, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
