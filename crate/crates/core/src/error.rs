use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{axis} factor {factor} does not divide {size}")]
    NonDivisibleFactor {
        axis: &'static str,
        factor: usize,
        size: usize,
    },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("pattern is identically zero, main coverage is empty")]
    AllMasked,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("phase-center fit is rank deficient (rank {rank}, condition number {condition:.3e})")]
    RankDeficient { rank: usize, condition: f64 },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("relative error is undefined for a zero ground-truth response")]
    UndefinedAtZero,

    #[error(
        "band limit ({k_theta}, {k_phi}) is not below the grid half-resolution ({m}, {n})"
    )]
    BandLimitViolation {
        k_theta: usize,
        k_phi: usize,
        m: usize,
        n: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("container format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
