use std::path::PathBuf;

use crate::graph::EdgeId;

/// Errors produced by graph loading, decomposition and anchor selection.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge {0} is not in the graph")]
    InvalidEdge(EdgeId),

    #[error("edge {0} is already anchored")]
    AlreadyAnchored(EdgeId),

    #[error("edge {0} is not anchored")]
    NotAnchored(EdgeId),

    #[error("exhaustive search needs {required} subsets, above the cap of {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("budget {budget} exceeds the candidate pool of {pool} edges")]
    PoolTooSmall { pool: usize, budget: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
