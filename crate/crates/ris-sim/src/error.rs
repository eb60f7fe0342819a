//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// Geometric precondition violated (coincident points, out-of-range angle, ...).
    #[error("geometry: {0}")]
    Geometry(String),

    /// Channel-model precondition violated (non-positive distance, bad RF params).
    #[error("channel: {0}")]
    Channel(String),

    /// RIS codebook / phase-configuration misuse.
    #[error("ris: {0}")]
    Ris(String),

    /// Dimension mismatch in a link-budget evaluation.
    #[error("link: {0}")]
    Link(String),

    /// Trajectory file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Trajectory or dataset precondition violated.
    #[error("trajectory: {0}")]
    Trajectory(String),

    /// Predictor shape/usage error.
    #[error("predictor: {0}")]
    Predictor(String),

    /// Scenario construction or frame evaluation failure.
    #[error("sim: {0}")]
    Sim(String),

    /// Run configuration rejected during validation.
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
