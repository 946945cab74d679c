use thiserror::Error;

use crate::graph::Partition;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("graph has no edges (total weight is zero)")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("label propagation did not converge within {sweeps} sweeps")]
    NotConverged { sweeps: usize, last: Partition },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by malformed or unusable input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Io { .. } | Error::EmptyGraph | Error::InvalidSpec(_)
        )
    }
}
