//! Kernel functions, kernel matrices and positive-semidefiniteness checks.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{sym_eigenvalues, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    /// `(2πν²)^{-d/2} exp(−‖x−y‖²/(2ν²))` in dimension `d`.
    Gaussian,
    /// `(1/(2ν)) 1{|x−y| ≤ ν}`; compactly supported and not positive
    /// semidefinite.
    UniformBox,
    /// `x·y`. Unbounded and sign-indefinite; accepted only by the similarity
    /// computation on bounded supports.
    Linear,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::UniformBox => "uniform_box",
            KernelFamily::Linear => "linear",
        }
    }
}

/// A translation-invariant base kernel plus an optional constant offset
/// (regularization).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    nu: f64,
    offset: f64,
}

impl Kernel {
    pub fn gaussian(nu: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, nu, 0.0)
    }

    pub fn uniform_box(nu: f64) -> Result<Self> {
        Self::new(KernelFamily::UniformBox, nu, 0.0)
    }

    pub fn linear() -> Self {
        Self {
            family: KernelFamily::Linear,
            nu: 1.0,
            offset: 0.0,
        }
    }

    pub fn new(family: KernelFamily, nu: f64, offset: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::BadParameter {
                name: "nu",
                value: nu,
                reason: "bandwidth must be positive and finite",
            });
        }
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::BadParameter {
                name: "offset",
                value: offset,
                reason: "regularization offset must be nonnegative",
            });
        }
        Ok(Self { family, nu, offset })
    }

    /// The same base kernel with `offset` added.
    pub fn regularized(self, offset: f64) -> Result<Self> {
        Self::new(self.family, self.nu, offset)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_regularized(&self) -> bool {
        self.offset > 0.0
    }

    /// Whether the family is positive semidefinite (offsets preserve this).
    pub fn is_psd_family(&self) -> bool {
        self.family == KernelFamily::Gaussian
    }

    /// `sup k` in one dimension.
    pub fn bound(&self) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 1.0 / ((2.0 * PI).sqrt() * self.nu) + self.offset,
            KernelFamily::UniformBox => 1.0 / (2.0 * self.nu) + self.offset,
            KernelFamily::Linear => f64::INFINITY,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.family {
            KernelFamily::Linear => x * y + self.offset,
            _ => self.profile((x - y).abs(), 1) + self.offset,
        }
    }

    /// Kernel value without the regularization offset.
    pub fn eval_base(&self, x: f64, y: f64) -> f64 {
        match self.family {
            KernelFamily::Linear => x * y,
            _ => self.profile((x - y).abs(), 1),
        }
    }

    /// Kernel between points of `ℝ^d` (`d = x.len()`).
    pub fn eval_nd(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self.family {
            KernelFamily::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + self.offset,
            KernelFamily::Gaussian => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                self.gaussian_from_sq(d2, x.len()) + self.offset
            }
            KernelFamily::UniformBox => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                self.profile(d2.sqrt(), x.len()) + self.offset
            }
        }
    }

    /// Base kernel (without offset) as a function of the distance.
    fn profile(&self, dist: f64, dim: usize) -> f64 {
        match self.family {
            KernelFamily::Gaussian => self.gaussian_from_sq(dist * dist, dim),
            KernelFamily::UniformBox => {
                if dist <= self.nu {
                    // normalized by the volume of the d-ball of radius ν
                    1.0 / ball_volume(dim, self.nu)
                } else {
                    0.0
                }
            }
            KernelFamily::Linear => unreachable!("linear kernel is not translation invariant"),
        }
    }

    fn gaussian_from_sq(&self, d2: f64, dim: usize) -> f64 {
        let norm = (2.0 * PI * self.nu * self.nu).powf(-0.5 * dim as f64);
        norm * (-d2 / (2.0 * self.nu * self.nu)).exp()
    }

    /// Points in one dimension where `y ↦ k(x, y)` is not smooth.
    pub fn kinks(&self, x: f64) -> Vec<f64> {
        match self.family {
            KernelFamily::UniformBox => vec![x - self.nu, x + self.nu],
            _ => Vec::new(),
        }
    }

    /// Distance beyond which the base kernel is negligible (≤ 1e-17 of its
    /// peak for the Gaussian, exactly zero for the box).
    pub fn reach(&self) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 9.0 * self.nu,
            KernelFamily::UniformBox => self.nu,
            KernelFamily::Linear => f64::INFINITY,
        }
    }

    /// Short human-readable label such as `gaussian(nu=2, offset=0.05)`.
    pub fn describe(&self) -> String {
        if self.offset > 0.0 {
            format!("{}(nu={}, offset={})", self.family.name(), self.nu, self.offset)
        } else {
            format!("{}(nu={})", self.family.name(), self.nu)
        }
    }
}

fn ball_volume(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0 * r,
        2 => PI * r * r,
        3 => 4.0 / 3.0 * PI * r * r * r,
        d => {
            let half = d as f64 / 2.0;
            PI.powf(half) / libm::tgamma(half + 1.0) * r.powi(d as i32)
        }
    }
}

/// `A_ij = k(x_i, x_j)/n` for one-dimensional points.
pub fn kernel_matrix(k: &Kernel, points: &[f64]) -> Matrix {
    let n = points.len();
    symmetric_from(n, |i, j| k.eval(points[i], points[j]) / n as f64)
}

/// `A_ij = k(x_i, x_j)/n` for points in `ℝ^d`.
pub fn kernel_matrix_nd(k: &Kernel, points: &[Vec<f64>]) -> Matrix {
    let n = points.len();
    symmetric_from(n, |i, j| k.eval_nd(&points[i], &points[j]) / n as f64)
}

/// Fills the upper triangle from `f` and mirrors it so the result is exactly
/// symmetric.
fn symmetric_from(n: usize, f: impl Fn(usize, usize) -> f64) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = f(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// Whether the kernel matrix on `points` has `λ_min ≥ −tolerance`.
pub fn psd_check(k: &Kernel, points: &[f64], tolerance: f64) -> Result<PsdReport> {
    if points.len() < 2 {
        return Err(Error::BadParameter {
            name: "points",
            value: points.len() as f64,
            reason: "at least two points are required",
        });
    }
    let vals = sym_eigenvalues(&kernel_matrix(k, points))?;
    let min_eigenvalue = *vals.last().expect("nonempty spectrum");
    Ok(PsdReport {
        is_psd: min_eigenvalue >= -tolerance,
        min_eigenvalue,
    })
}
