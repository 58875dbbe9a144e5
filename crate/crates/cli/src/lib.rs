//! Experiment harness: simulation sweeps, edge-list ingestion, alignment
//! binning, and result emission (CSV and SVG).
//!
//! Everything here is deterministic given the seeds in the inputs: sweep
//! replications draw from content-keyed random streams, so a grid cell's
//! results depend on its parameter values, not on execution order, and the
//! emitted CSV is byte-stable across runs.

pub mod bins;
pub mod curve;
pub mod edgelist;
pub mod emit;
pub mod pi_csv;
pub mod svg;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Core(#[from] privmix_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
