use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("malformed record at line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("non-finite value in episode {episode}, step {step}")]
    NonFinite { episode: u64, step: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty action chunk")]
    EmptyChunk,

    #[error("mask has no valid entries")]
    EmptyMask,

    #[error("start rails ({x}, {z}) outside rail limits")]
    OutOfLimits { x: f64, z: f64 },

    #[error("simulation already halted ({0})")]
    Halted(String),

    #[error("policy failed at step {step}: {message}")]
    Policy { step: usize, message: String },

    #[error("training diverged at step {step}")]
    Diverged { step: usize },

    #[error("expert failure rate {rate:.3} exceeds limit")]
    ExpertFailure { rate: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
