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

    /// Malformed input data. `location` carries row/col or line context.
    #[error("{file}: {location}: {message}")]
    Parse {
        file: String,
        location: String,
        message: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("malformed ring in {unit}: {reason}")]
    MalformedRing { unit: String, reason: String },

    #[error("no datacenters match filter [{0}]")]
    EmptyCatalog(String),

    /// Every unit has a zero Cloud Access Indicator, so the concentration
    /// curve has no mass to distribute.
    #[error("no access anywhere: total CAI mass is zero")]
    NoAccess,

    #[error("unknown datacenter id `{0}`")]
    UnknownDatacenter(String),

    #[error("unknown probe id `{probe_id}` at line {line}")]
    UnknownProbe { probe_id: String, line: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the input data rather than by arguments.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::MalformedRing { .. }
                | Error::EmptyCatalog(_)
                | Error::NoAccess
                | Error::UnknownDatacenter(_)
                | Error::UnknownProbe { .. }
        )
    }
}
