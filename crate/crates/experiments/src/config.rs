//! Serializable run configuration. Every artifact header carries the SHA-256
//! of the canonical JSON form of the configuration (without the output
//! directory) together with the root seed.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use specgeo_core::mixture::{gaussian_pair, triangular_bad, triangular_pair, uniform_linear};
use specgeo_core::params::Method;
use specgeo_core::Preset;

use crate::error::{ExpError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum MixtureSpec {
    GaussianPair { mu: f64, nu: f64 },
    TriangularPair { mu: f64, nu: f64 },
    TriangularBad { mu: f64, nu: f64 },
    UniformLinear { delta: f64 },
}

impl MixtureSpec {
    pub fn preset(&self) -> Result<Preset> {
        Ok(match *self {
            MixtureSpec::GaussianPair { mu, nu } => gaussian_pair(mu, nu)?,
            MixtureSpec::TriangularPair { mu, nu } => triangular_pair(mu, nu)?,
            MixtureSpec::TriangularBad { mu, nu } => triangular_bad(mu, nu)?,
            MixtureSpec::UniformLinear { delta } => uniform_linear(delta)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Closed,
    Quadrature,
    MonteCarlo { samples: usize },
}

impl MethodSpec {
    pub fn method(self, seed: u64) -> Method {
        match self {
            MethodSpec::Closed => Method::Closed,
            MethodSpec::Quadrature => Method::Quadrature,
            MethodSpec::MonteCarlo { samples } => Method::MonteCarlo { n: samples, seed },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub mixture: MixtureSpec,
    pub offset: f64,
    pub method: MethodSpec,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mixture: MixtureSpec::GaussianPair { mu: 6.0, nu: 2.0 },
            offset: 0.0,
            method: MethodSpec::Closed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriangularDensityConfig {
    pub nu: f64,
    pub nodes: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for TriangularDensityConfig {
    fn default() -> Self {
        Self {
            nu: 0.05,
            nodes: 601,
            x_min: -1.25,
            x_max: 1.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityConfig {
    pub gaussian_nu: f64,
    pub gaussian_mu: Vec<f64>,
    pub mc_samples: usize,
    pub triangular_nu: Vec<f64>,
    pub triangular_mu: Vec<f64>,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            gaussian_nu: 2.0,
            gaussian_mu: (2..=12).map(f64::from).collect(),
            mc_samples: 1_000_000,
            triangular_nu: vec![0.05, 0.5],
            triangular_mu: (10..=22).map(|i| f64::from(i) / 10.0).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingConfig {
    pub nu: f64,
    pub mu: Vec<f64>,
    pub mc_samples: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            nu: 2.0,
            mu: (4..=12).map(f64::from).collect(),
            mc_samples: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhoConfig {
    pub nu: f64,
    pub mu: Vec<f64>,
    /// Minimum R² of the least-squares line of ρ against `S_max + C`.
    pub min_r_squared: f64,
}

impl Default for RhoConfig {
    fn default() -> Self {
        Self {
            nu: 2.0,
            mu: (6..=12).map(f64::from).collect(),
            min_r_squared: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub bandwidths: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub min_r_squared: f64,
    /// Factor `c` applied to the Gaussian kernel before evaluating ψ; the
    /// default `√(2π)` turns the unit-mass kernel into `exp(−d²/2ν²)/ν`.
    pub kernel_scale: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            bandwidths: vec![0.15, 0.45, 0.75, 1.0, 1.5, 2.5],
            t_min: 0.05,
            t_max: 0.8,
            points: 40,
            min_r_squared: 0.98,
            kernel_scale: (2.0 * PI).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub n: usize,
    pub mu: f64,
    pub nu: f64,
    pub offset: f64,
    pub theta: f64,
    pub pair_theta: f64,
    pub n_tuples: usize,
    pub max_alpha: f64,
    pub min_pair_fraction: f64,
    pub blobs_n: usize,
    pub blob_centers: Vec<[f64; 2]>,
    pub blob_sigma: f64,
    pub blob_nu: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            mu: 6.0,
            nu: 2.0,
            offset: 0.05,
            theta: PI / 8.0,
            pair_theta: PI / 4.0,
            n_tuples: 20_000,
            max_alpha: 0.05,
            min_pair_fraction: 0.95,
            blobs_n: 600,
            blob_centers: vec![[0.0, 0.0], [6.0, 0.0], [3.0, 5.2]],
            blob_sigma: 1.0,
            blob_nu: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Proposition1Config {
    pub alpha: f64,
    pub theta: f64,
    pub cluster_size: usize,
    pub inits: usize,
    pub max_iter: usize,
}

impl Default for Proposition1Config {
    fn default() -> Self {
        Self {
            alpha: 0.02,
            theta: PI / 10.0,
            cluster_size: 500,
            inits: 1000,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub cheeger_nodes: usize,
    pub allowance: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            cheeger_nodes: 601,
            allowance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid_nodes: usize,
    /// Not part of the configuration hash.
    pub output_dir: Option<PathBuf>,
    pub params: ParamsConfig,
    pub triangular_density: TriangularDensityConfig,
    pub similarity: SimilarityConfig,
    pub coupling: CouplingConfig,
    pub rho: RhoConfig,
    pub tail: TailConfig,
    pub embedding: EmbeddingConfig,
    pub proposition1: Proposition1Config,
    pub checks: ChecksConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            grid_nodes: 601,
            output_dir: None,
            params: ParamsConfig::default(),
            triangular_density: TriangularDensityConfig::default(),
            similarity: SimilarityConfig::default(),
            coupling: CouplingConfig::default(),
            rho: RhoConfig::default(),
            tail: TailConfig::default(),
            embedding: EmbeddingConfig::default(),
            proposition1: Proposition1Config::default(),
            checks: ChecksConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| ExpError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(ExpError::Config(msg.to_string()));
        if self.grid_nodes < 3 {
            return bad("grid_nodes must be at least 3");
        }
        self.params.mixture.preset().map_err(|e| ExpError::Config(e.to_string()))?;
        if self.embedding.n < 2 || self.embedding.blobs_n < 3 {
            return bad("embedding sample sizes too small");
        }
        if !(self.tail.t_min > 0.0 && self.tail.t_max > self.tail.t_min && self.tail.points >= 2) {
            return bad("tail grid must satisfy 0 < t_min < t_max with at least 2 points");
        }
        if !self.tail.kernel_scale.is_finite() || self.tail.kernel_scale <= 0.0 {
            return bad("tail.kernel_scale must be positive");
        }
        if self.proposition1.inits == 0 || self.proposition1.cluster_size == 0 {
            return bad("proposition1 needs positive cluster size and init count");
        }
        Ok(())
    }

    /// Canonical JSON of the configuration without the output directory.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        serde_json::to_string(&c).expect("configuration serializes")
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
