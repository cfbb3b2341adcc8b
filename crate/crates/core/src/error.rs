use thiserror::Error;

/// Errors raised by the phase-space toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("level index {index} out of range for basis of size {size}")]
    LevelOutOfRange { index: usize, size: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("units mismatch: expected {expected}, found {found}")]
    UnitsMismatch { expected: String, found: String },

    #[error("effective hbar mismatch: {0} vs {1}")]
    HbarMismatch(f64, f64),

    #[error("non-finite value at p = {p}, q = {q} ({context})")]
    NonFinite { p: f64, q: f64, context: String },

    #[error(
        "accelerated sum failed to converge at p = {p}, q = {q}: last change {last_delta:e} after {terms} terms"
    )]
    NonConvergence {
        p: f64,
        q: f64,
        last_delta: f64,
        terms: usize,
    },

    #[error("wave function not contained in the momentum window: edge weight {edge_weight:e}")]
    SupportTooWide { edge_weight: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unstable time step: dt * max|E| = {0} exceeds {1}")]
    UnstableStep(f64, f64),

    #[error("projection tail {tail:e} exceeds tolerance {tolerance:e}")]
    ProjectionTail { tail: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
