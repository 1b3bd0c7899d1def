use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("graph is disconnected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("object bucket infeasible: {qualifying} qualifying vertices, {requested} requested")]
    InfeasibleBucket { qualifying: usize, requested: usize },

    #[error("ROAD hierarchy infeasible at level {level}: an Rnet has {vertices} vertices, fewer than fanout {fanout}")]
    InfeasibleLevel {
        level: usize,
        vertices: usize,
        fanout: usize,
    },

    #[error("SILC build refused: estimated {estimated_bytes} bytes exceeds budget of {budget_bytes} bytes")]
    MemoryBudget {
        estimated_bytes: u64,
        budget_bytes: u64,
    },

    #[error("zero-weight edge ({0}, {1})")]
    ZeroWeight(usize, usize),

    #[error("bad index file: {0}")]
    BadIndex(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
