//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: usize, right: usize },

    #[error("singular parameter: {0}")]
    SingularParameter(&'static str),

    #[error("steady-state iteration did not converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("all jump-channel weights vanish (dark state)")]
    DarkState,

    #[error("jump produced a state with norm^2 {norm_sq:.3e} below threshold")]
    DarkJump { norm_sq: f64 },

    #[error("waiting-time density domain error: {0}")]
    WaitingDomain(&'static str),

    #[error("no emission possible: {0}")]
    NoEmission(&'static str),

    #[error("degenerate posterior: log-likelihood is -inf on every grid point")]
    DegeneratePosterior,

    #[error("envelope violated at theta={theta}: unnormalised density {density:.6e} exceeds M*proposal {bound:.6e}")]
    InvalidEnvelope { theta: f64, density: f64, bound: f64 },

    #[error("pattern holds {have} clicks, need {need}")]
    InsufficientClicks { have: usize, need: usize },

    #[error("signal-to-noise ratio undefined: {0}")]
    UndefinedSnr(&'static str),

    #[error("second-order correlation undefined: stationary intensity is zero")]
    UndefinedG2,

    #[error("histograms are incompatible: {0}")]
    IncompatibleHistogram(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("detuning {query} is not a grid point (nearest grid point {nearest})")]
    NotOnGrid { query: f64, nearest: f64 },

    #[error("library exhausted after {drawn} draws")]
    LibraryExhausted { drawn: usize },

    #[error("library schema version {found} unsupported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("library checksum mismatch")]
    ChecksumMismatch,

    #[error("corrupt library file at byte offset {offset}: {reason}")]
    CorruptFile { offset: u64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
