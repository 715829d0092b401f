use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record-level failure, annotated with the file and 1-based line.
    #[error("{}:{line}: {source}", path.display())]
    Record {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse failure: {0}")]
    Parse(String),

    #[error("rating out of range: {0} (expected 1..=5)")]
    RatingOutOfRange(i64),

    #[error("duplicate contribution: {kind} by user {user} on item {item}")]
    DuplicateContribution {
        kind: &'static str,
        user: String,
        item: String,
    },

    #[error("duplicate {0} id {1}")]
    DuplicateId(&'static str, String),

    #[error("dangling reference to unknown {0} {1}")]
    DanglingReference(&'static str, String),

    #[error("invalid friend edge {0} -- {1}: {2}")]
    InvalidFriendEdge(String, String, &'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty graph")]
    EmptyGraph,

    #[error("unknown user {0}")]
    UnknownUser(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("empty split")]
    EmptySplit,

    #[error("unknown ablation {0:?} (expected full, noF, noE or noS)")]
    UnknownAblation(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(self, path: impl Into<PathBuf>, line: usize) -> Self {
        Error::Record {
            path: path.into(),
            line,
            source: Box::new(self),
        }
    }
}
