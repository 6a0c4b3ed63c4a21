//! Error types shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("graph is disconnected (second eigenvalue {lambda2:.3e} below threshold {threshold:.3e})")]
    DisconnectedGraph { lambda2: f64, threshold: f64 },

    #[error("coupling slope at the origin is not positive ({0})")]
    NonPositiveSlope(f64),

    #[error("matrix has {0} eigenvalues in the kernel band; expected exactly one")]
    MultipleZeroModes(usize),

    #[error("interior block is numerically singular (condition estimate {0:.3e})")]
    SingularInteriorBlock(f64),

    #[error("low-rank update is singular (pivot magnitude {0:.3e})")]
    SingularUpdate(f64),

    #[error("fixed-point iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("state diverged at node {node} around t = {time}")]
    Divergence { node: String, time: f64 },

    #[error("unknown node or edge: {0}")]
    InvalidTarget(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("signature vectors are degenerate (Gram condition {0:.3e})")]
    DegenerateSignatures(f64),

    #[error("network generation failed: {0}")]
    GenerationFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
