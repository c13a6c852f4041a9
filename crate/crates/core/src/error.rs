use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("complex scaling angle {theta:.6} rad violates the analyticity bound {bound:.6} rad")]
    Analyticity { theta: f64, bound: f64 },

    #[error("overlap matrix too ill-conditioned: {dropped} of {total} directions below threshold")]
    Conditioning { dropped: usize, total: usize },

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("resonance family {0} not found")]
    NotFound(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
