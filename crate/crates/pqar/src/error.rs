// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = PqarError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PqarError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("row {row}: {message}")]
    Row { row: u64, message: String },

    #[error("{0}")]
    Input(String),

    #[error("unsupported report schema version {found} (this build reads {supported}.x)")]
    SchemaVersion { found: String, supported: u64 },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] pqar_core::Error),
}

impl PqarError {
    /// Process exit code: 2 for bad input or usage, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        use pqar_core::Error as E;
        match self {
            PqarError::Core(E::Singular | E::NoConvergence(_) | E::Overflow { .. }) => 3,
            _ => 2,
        }
    }
}
