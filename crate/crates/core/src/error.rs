use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    Format(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("segmentation failed: {0}")]
    Segmentation(String),

    #[error("cannot build a four-segment partition: {0}")]
    Partition(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("fitness returned {value} at position {position:?}")]
    Optimization { position: Vec<f64>, value: f64 },

    #[error("quality metric failed: {0}")]
    Metric(String),

    #[error("quality model error: {0}")]
    Model(String),

    #[error("model training failed: {0}")]
    Training(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("enhancement failed: {0}")]
    Enhancement(String),

    #[error("stability analysis failed: {0}")]
    Stability(String),

    #[error("report error: {0}")]
    Report(String),
}

/// Coarse grouping used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Configuration,
    Data,
    Internal,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Model(_) | Error::Parameter(_) => ErrorClass::Configuration,
            Error::Io { .. } | Error::Format(_) | Error::InvalidImage(_) | Error::Training(_) | Error::Report(_) => {
                ErrorClass::Data
            }
            Error::Segmentation(_)
            | Error::Partition(_)
            | Error::Optimization { .. }
            | Error::Metric(_)
            | Error::Enhancement(_)
            | Error::Stability(_) => ErrorClass::Internal,
        }
    }
}
