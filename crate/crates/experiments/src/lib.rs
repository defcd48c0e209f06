//! Experiment runner: figure data, verification suites, reproducible CSV
//! and SVG artifacts, and the `specgeo` command line.

pub mod artifact;
pub mod checks;
pub mod cli;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod report;
pub mod svg;

pub use error::{ExpError, Result};
