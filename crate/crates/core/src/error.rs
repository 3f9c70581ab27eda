use std::path::PathBuf;

use thiserror::Error;

/// A configuration value that failed validation or could not be read.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid `{field}`: {constraint}")]
    Invalid {
        field: &'static str,
        constraint: String,
    },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("malformed configuration document: {0}")]
    Malformed(String),
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, constraint: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            constraint: constraint.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("quantile of an empty sample")]
    EmptySample,
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
}

/// Top-level error for anything that reads or writes files.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
