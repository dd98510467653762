use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two endpoints coincide or are antipodal, so the quantity is undefined.
    #[error("degenerate endpoint pair: {0}")]
    DegeneratePair(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A TLE field does not fit its fixed-width column.
    #[error("TLE format error: {0}")]
    Format(String),

    #[error("route series is empty")]
    EmptySeries,

    #[error("pair {0} is unreachable in every snapshot")]
    NeverReachable(usize),

    #[error("empty input")]
    EmptyInput,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("duplicate city id {0}")]
    DuplicateId(u32),

    #[error("line {line}: coordinate out of range: {msg}")]
    CoordinateRange { line: u64, msg: String },

    #[error("no run output for shell {0}")]
    MissingRun(String),

    #[error("{path}: {source}")]
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
