//! Runs every experiment and writes the artifacts with a manifest of file
//! digests and check outcomes.

use std::path::Path;

use serde::Serialize;

use crate::artifact::{write_file, Artifact, WrittenFile};
use crate::checks;
use crate::config::RunConfig;
use crate::error::Result;
use crate::figures;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifestCheck {
    pub experiment: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub seed: u64,
    pub files: Vec<WrittenFile>,
    pub checks: Vec<ManifestCheck>,
    pub passed: bool,
}

impl Manifest {
    pub fn failures(&self) -> impl Iterator<Item = &ManifestCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// The lemma, theorem, indivisibility, Cheeger and recovery-rate suites.
pub fn check_suite(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let points = figures::rho_sweep_points(cfg)?;
    let mut theorem = Artifact::new("theorem1");
    theorem.checks.push(figures::theorem1_check_summary(&points));
    theorem.tables.push(figures::rho_sweep_table(&points));
    Ok(vec![
        checks::indivisibility_suite()?,
        theorem,
        checks::lemma_suite(&points),
        checks::cheeger_suite(cfg)?,
        checks::proposition1(cfg)?,
    ])
}

/// Every figure, the parameter table and the check suites.
pub fn all_artifacts(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let points = figures::rho_sweep_points(cfg)?;
    Ok(vec![
        figures::params_table(cfg)?,
        figures::triangular_density(cfg)?,
        figures::similarity(cfg)?,
        figures::coupling_figure(cfg)?,
        figures::rho_linearity(cfg, &points),
        checks::lemma_suite(&points),
        figures::tail_decay(cfg)?,
        figures::embedding_ocs(cfg)?,
        checks::indivisibility_suite()?,
        checks::cheeger_suite(cfg)?,
        checks::proposition1(cfg)?,
    ])
}

/// Writes artifacts, `config.json` and `manifest.json` into `dir`.
pub fn write_report(dir: &Path, cfg: &RunConfig, artifacts: &[Artifact]) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut files = vec![write_file(dir, "config.json", cfg.canonical_json().as_bytes())?];
    let mut checks = Vec::new();
    for a in artifacts {
        files.extend(a.write(dir, cfg)?);
        checks.extend(a.checks.iter().map(|c| ManifestCheck {
            experiment: a.experiment.clone(),
            name: c.name.clone(),
            passed: c.passed,
            detail: c.detail.clone(),
        }));
    }
    let manifest = Manifest {
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        files,
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}

pub fn report_all(cfg: &RunConfig, dir: &Path) -> Result<Manifest> {
    write_report(dir, cfg, &all_artifacts(cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::Check;
    use crate::output::Table;

    #[test]
    fn manifest_lists_files_and_checks() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::default();
        let mut a = Artifact::new("demo");
        let mut t = Table::new("demo.csv", &["x"]);
        t.push(vec![1.0.into()]);
        a.tables.push(t);
        a.checks.push(Check::new("ok", true, String::new()));
        a.checks.push(Check::new("bad", false, "detail".into()));
        let m = write_report(dir.path(), &cfg, &[a]).unwrap();
        assert!(!m.passed);
        assert_eq!(m.failures().count(), 1);
        let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(names, vec!["config.json", "demo.csv"]);
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(text.contains(&cfg.hash()));
        let again = write_report(dir.path(), &cfg, &[]).unwrap();
        assert_eq!(again.files[0], m.files[0]);
    }
}
