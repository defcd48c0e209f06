//! Population-level and finite-sample diagnostics for kernelized spectral
//! clustering of nonparametric mixtures.

pub mod cluster;
pub mod density;
pub mod embedding;
pub mod error;
pub mod kernel;
pub mod mixture;
pub mod numerics;
pub mod params;
pub mod popoperator;

pub use error::{Error, Result};
pub use kernel::{Kernel, KernelFamily};
pub use mixture::{Component, LabeledSample, Mixture, Preset};
