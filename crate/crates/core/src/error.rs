use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point masses have no density function")]
    NoDensity,

    #[error("distribution already has compact support within the truncation cap")]
    AlreadyCompact,

    #[error("distribution has unbounded support; truncate it first")]
    UnboundedSupport,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not a probability simplex vector: {0}")]
    NotASimplex(String),

    #[error("copula table assigns negative mass {mass:e} to rectangle ({i}, {j})")]
    NegativeRectangleMass { i: usize, j: usize, mass: f64 },

    #[error("items {0} and {1} cannot be ordered")]
    IncomparablePair(usize, usize),

    #[error("payoffs of candidates {0} and {1} are incomparable")]
    IncomparablePayoffs(usize, usize),

    #[error("both distributions have compact support; use compare()")]
    BothCompact,

    #[error("fictitious play requires the product copula")]
    UnsupportedCoupling,

    #[error("grid oracle supports at most 3 actions per player (got {rows}x{cols})")]
    TooLarge { rows: usize, cols: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid {location}: {reason}")]
    Validation { location: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
