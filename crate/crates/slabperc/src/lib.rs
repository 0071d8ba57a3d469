//! Batch driver for `slabperc-core`: a rayon executor, CSV/JSON/SVG output
//! and run manifests that replay byte for byte.

use std::path::{Path, PathBuf};

pub mod cli;
pub mod exec;
pub mod io;
pub mod manifest;
pub mod plot;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] slabperc_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Invalid(String),
    #[error("replay differs from the recorded run in {0:?}")]
    ReplayMismatch(Vec<String>),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }
}
