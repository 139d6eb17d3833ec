use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("truncated basis needs dim >= 2, got {0}")]
    InvalidBasis(usize),

    #[error("state is not normalized: norm {norm:.3e} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("truncation at dim {dim} is inadequate (tail mass {tail:.3e}); use dim >= {suggested}")]
    TruncationInadequate { dim: usize, tail: f64, suggested: usize },

    #[error("operator is not Hermitian: ||H - H^dag||_F = {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("density matrix has trace {trace:.12}")]
    TraceNotOne { trace: f64 },

    #[error("density matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("degenerate coherent superposition: {0}")]
    DegenerateSuperposition(String),

    #[error("isometry has {found} columns but the state has support rank {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("ensemble of {len} members exceeds the flag-space cap of {cap}")]
    EnsembleTooLarge { len: usize, cap: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("reference amplitude alpha_r must be non-zero")]
    ZeroReference,

    #[error("QFI must be positive to form a Cramer-Rao bound, got {0:.3e}")]
    NonPositiveQfi(f64),

    #[error("eigensolver failed to converge after {0} iterations")]
    EigenNoConvergence(usize),

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
}
