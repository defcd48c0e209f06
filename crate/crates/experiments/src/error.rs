use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error(transparent)]
    Core(#[from] specgeo_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("bad input: {0}")]
    Input(String),
}

pub type Result<T, E = ExpError> = std::result::Result<T, E>;
