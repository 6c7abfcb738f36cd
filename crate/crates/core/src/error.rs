use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("point {index} is invalid: {reason}")]
    InvalidPoint { index: usize, reason: String },

    /// A cut height above the graph radius was requested.
    #[error("cut height {height} km exceeds h_max = {h_max} km")]
    CutAboveRadius { height: f64, h_max: f64 },

    /// A routine that requires a connected input received a disconnected one.
    #[error("graph with {nodes} nodes is not connected ({edges} spanning edges found)")]
    Disconnected { nodes: usize, edges: usize },

    #[error(
        "dense baseline refused for n = {n}: limit is {limit} points, condensed matrix needs {required_bytes} bytes"
    )]
    DenseInfeasible {
        n: usize,
        limit: usize,
        required_bytes: u64,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: unsupported format: {message}")]
    Format { path: PathBuf, message: String },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
