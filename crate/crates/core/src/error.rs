use std::path::PathBuf;

use thiserror::Error;

/// A state with non-positive density or pressure.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("inadmissible state: rho = {rho:e}, p = {p:e}")]
pub struct StateError {
    pub rho: f64,
    pub p: f64,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid generator parameters: {0}")]
    Generator(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("coarsening stalled at level {level}: no face passed the merge tests")]
    CoarseningStalled { level: usize },
    #[error("divergence at iteration {iteration}, cell {cell}: {what}")]
    Diverged {
        iteration: usize,
        cell: usize,
        what: String,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
