use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("icosphere level {0} exceeds the maximum of {max}", max = crate::mesh::MAX_ICOSPHERE_LEVEL)]
    LevelTooLarge(u32),
    #[error("direction is not unit length (norm {0})")]
    NonUnitDirection(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("wrong channel layout: expected {expected}, model uses {actual}")]
    WrongLayout {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("incompatible models: {0}")]
    Incompatible(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero-norm vector where a direction is required")]
    ZeroNorm,
    #[error("no valid entries to evaluate")]
    NoValidEntries,
    #[error("non-finite loss at step {step}")]
    NonFinite { step: usize },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("weight file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
