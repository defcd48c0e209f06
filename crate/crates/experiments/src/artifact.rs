use std::path::Path;

use serde::Serialize;

use crate::config::{sha256_hex, RunConfig};
use crate::error::Result;
use crate::output::{provenance_header, Table};
use crate::svg::Plot;

/// A named assertion evaluated by an experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// The outputs of one experiment.
#[derive(Clone, Debug, Default)]
pub struct Artifact {
    pub experiment: String,
    pub tables: Vec<Table>,
    /// `(file name, plot)`.
    pub plots: Vec<(String, Plot)>,
    pub checks: Vec<Check>,
}

/// A file written to disk with its digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WrittenFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

impl Artifact {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Writes every table and plot into `dir`.
    pub fn write(&self, dir: &Path, cfg: &RunConfig) -> Result<Vec<WrittenFile>> {
        std::fs::create_dir_all(dir)?;
        let header = provenance_header(&self.experiment, &cfg.hash(), cfg.seed);
        let mut out = Vec::new();
        for t in &self.tables {
            out.push(write_file(dir, &t.file, t.render(&header)?.as_bytes())?);
        }
        for (file, plot) in &self.plots {
            out.push(write_file(dir, file, plot.render().as_bytes())?);
        }
        Ok(out)
    }
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<WrittenFile> {
    std::fs::write(dir.join(name), bytes)?;
    Ok(WrittenFile {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len(),
    })
}
