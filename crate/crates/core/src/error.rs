use thiserror::Error;

/// Errors raised across the simulator and the optimization harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("matrix dimension {dim} exceeds the configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("GKP codeword norm {norm:e} before normalization is below the cutoff floor")]
    CutoffTooSmall { norm: f64 },
    #[error("graph has {n} vertices; exhaustive search is limited to {limit}")]
    TooManyVertices { n: usize, limit: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(&'static str),
    #[error("parameter vector has length {found}, layout expects {expected}")]
    LayoutMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("objective returned a non-finite value at evaluation {eval}")]
    NonFiniteObjective { eval: usize },
    #[error("every optimizer start was aborted")]
    AllStartsAborted,
}

pub type Result<T> = core::result::Result<T, Error>;
