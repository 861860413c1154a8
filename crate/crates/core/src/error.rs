use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: `*` is reserved for the wildcard label")]
    ReservedToken { line: usize },

    #[error("query has no predicates")]
    EmptyQuery,

    #[error("predicate {index} shares no variable with earlier predicates")]
    UnsupportedQuery { index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("vertex {vertex} is not owned by partition {partition}")]
    Ownership { partition: usize, vertex: VertexId },

    #[error("operation requires redundant (target-keyed) partition stores")]
    RedundancyRequired,

    #[error("vertex {vertex} is outside the routing table range (0..{len})")]
    Routing { vertex: VertexId, len: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep the rendered message.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(IoError(err.to_string()))
    }
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
