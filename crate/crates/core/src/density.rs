//! Square-root kernelized densities `q(x) = √(∫ k(x,y) dP(y))` and the
//! normalized kernels built from them.

use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelFamily};
use crate::mixture::{Component, Mixture};
use crate::numerics::{make_grid, normal_mass, normal_pdf, GaussLegendre, QuadratureGrid, Rule};

/// Default lower bound accepted for `q` where the distribution has mass.
pub const R_FLOOR: f64 = 1e-8;

/// Tolerance of the panel-halving self-consistency check.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

const GL_ORDER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityForm {
    Closed,
    Quadrature,
}

/// `x ↦ ∫ k(x,y) dP(y)` for a kernel and a one-dimensional distribution.
#[derive(Clone, Debug)]
pub struct KernelizedDensity {
    kernel: Kernel,
    dist: Component,
    form: DensityForm,
    rule: GaussLegendre,
}

impl KernelizedDensity {
    /// Uses a closed form when the (kernel, distribution) pair has one and
    /// piecewise Gauss–Legendre quadrature otherwise.
    pub fn new(kernel: &Kernel, dist: &Component) -> Result<Self> {
        let form = if has_closed_form(kernel, dist) {
            DensityForm::Closed
        } else {
            DensityForm::Quadrature
        };
        Self::with_form(kernel, dist, form)
    }

    /// Forces quadrature even where a closed form exists.
    pub fn quadrature(kernel: &Kernel, dist: &Component) -> Result<Self> {
        Self::with_form(kernel, dist, DensityForm::Quadrature)
    }

    pub fn for_mixture(kernel: &Kernel, mixture: &Mixture) -> Result<Self> {
        Self::new(kernel, &mixture.as_component())
    }

    fn with_form(kernel: &Kernel, dist: &Component, form: DensityForm) -> Result<Self> {
        if kernel.family() == KernelFamily::Linear {
            return Err(Error::Unsupported(
                "the linear kernel has no kernelized density".into(),
            ));
        }
        if form == DensityForm::Closed && !has_closed_form(kernel, dist) {
            return Err(Error::Unsupported(format!(
                "no closed form for {} with {}",
                kernel.describe(),
                dist.describe()
            )));
        }
        Ok(Self {
            kernel: *kernel,
            dist: dist.clone(),
            form,
            rule: GaussLegendre::new(GL_ORDER),
        })
    }

    pub fn form(&self) -> DensityForm {
        self.form
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn distribution(&self) -> &Component {
        &self.dist
    }

    /// `q²(x) = ∫ k(x,y) dP(y)`.
    pub fn q_sq(&self, x: f64) -> f64 {
        let base = match self.form {
            DensityForm::Closed => closed_base(&self.kernel, &self.dist, x)
                .expect("closed form availability checked at construction"),
            DensityForm::Quadrature => self.quadrature_base(&self.dist, x, 1.0),
        };
        base + self.kernel.offset()
    }

    pub fn q(&self, x: f64) -> f64 {
        self.q_sq(x).max(0.0).sqrt()
    }

    /// `q` on each node.
    pub fn tabulate(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.q(x)).collect()
    }

    /// Recomputes `q²` on `nodes` with quadrature panels halved and fails
    /// with `GridTooCoarse` if any value moves by more than `1e-6`.
    pub fn check_refinement(&self, nodes: &[f64]) -> Result<()> {
        if self.form == DensityForm::Closed {
            return Ok(());
        }
        let mut worst: f64 = 0.0;
        for &x in nodes {
            let coarse = self.quadrature_base(&self.dist, x, 1.0);
            let fine = self.quadrature_base(&self.dist, x, 0.5);
            worst = worst.max((coarse - fine).abs());
        }
        if worst > REFINEMENT_TOLERANCE {
            return Err(Error::GridTooCoarse {
                quantity: "kernelized density",
                change: worst,
                tolerance: REFINEMENT_TOLERANCE,
            });
        }
        Ok(())
    }

    /// Points where `q²` may fail to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self.kernel.family() {
            KernelFamily::UniformBox => {
                let nu = self.kernel.nu();
                let mut edges = self.dist.kinks();
                for (a, b) in self.dist.support_intervals() {
                    edges.push(a);
                    edges.push(b);
                }
                edges.iter().flat_map(|&c| [c - nu, c + nu]).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `∫_{lo}^{hi} k(x,y) dP(y)`.
    pub fn window_integral(&self, x: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let base = if self.form == DensityForm::Closed {
            closed_window(&self.kernel, &self.dist, x, lo, hi)
        } else {
            None
        };
        let base = base.unwrap_or_else(|| self.quadrature_window(&self.dist, x, lo, hi));
        base + self.kernel.offset() * self.dist.mass(lo, hi)
    }

    fn quadrature_window(&self, dist: &Component, x: f64, lo: f64, hi: f64) -> f64 {
        if let Component::Composite(parts) = dist {
            return parts
                .iter()
                .map(|(w, c)| w * self.quadrature_window(c, x, lo, hi))
                .sum();
        }
        let (s0, s1) = dist.support();
        let reach = self.kernel.reach();
        let a = s0.max(x - reach).max(lo);
        let b = s1.min(x + reach).min(hi);
        if a >= b {
            return 0.0;
        }
        let mut breaks = dist.kinks();
        breaks.extend(self.kernel.kinks(x));
        let panel = 0.25 * dist.length_scale().min(self.kernel.nu());
        self.rule.integrate_piecewise(a, b, &breaks, panel, |y| {
            self.kernel.eval_base(x, y) * dist.density(y)
        })
    }

    fn quadrature_base(&self, dist: &Component, x: f64, panel_factor: f64) -> f64 {
        if let Component::Composite(parts) = dist {
            return parts
                .iter()
                .map(|(w, c)| w * self.quadrature_base(c, x, panel_factor))
                .sum();
        }
        let (s0, s1) = dist.support();
        let reach = self.kernel.reach();
        let lo = s0.max(x - reach);
        let hi = s1.min(x + reach);
        if lo >= hi {
            return 0.0;
        }
        let mut breaks = dist.kinks();
        breaks.extend(self.kernel.kinks(x));
        let panel = 0.25 * panel_factor * dist.length_scale().min(self.kernel.nu());
        self.rule.integrate_piecewise(lo, hi, &breaks, panel, |y| {
            self.kernel.eval_base(x, y) * dist.density(y)
        })
    }
}

fn has_closed_form(kernel: &Kernel, dist: &Component) -> bool {
    match (kernel.family(), dist) {
        (KernelFamily::UniformBox, _) => true,
        (KernelFamily::Gaussian, Component::Composite(parts)) => {
            parts.iter().all(|(_, c)| has_closed_form(kernel, c))
        }
        (KernelFamily::Gaussian, Component::Gaussian { .. } | Component::Uniform { .. }) => true,
        _ => false,
    }
}

/// Closed-form `∫ k(x,y) dP(y)` for the base kernel (no offset).
fn closed_base(kernel: &Kernel, dist: &Component, x: f64) -> Option<f64> {
    let nu = kernel.nu();
    match (kernel.family(), dist) {
        // box kernel: probability of the window [x − ν, x + ν] over its width
        (KernelFamily::UniformBox, d) => Some(d.mass(x - nu, x + nu) / (2.0 * nu)),
        (KernelFamily::Gaussian, Component::Gaussian { mu, sigma }) => {
            // Gaussian convolution: N(x; μ, σ² + ν²)
            let s = (sigma * sigma + nu * nu).sqrt();
            Some(normal_pdf((x - mu) / s) / s)
        }
        (KernelFamily::Gaussian, Component::Uniform { a, b }) => {
            Some(normal_mass((a - x) / nu, (b - x) / nu) / (b - a))
        }
        (KernelFamily::Gaussian, Component::Composite(parts)) => parts
            .iter()
            .map(|(w, c)| closed_base(kernel, c, x).map(|v| w * v))
            .sum(),
        _ => None,
    }
}

/// Closed-form `∫_{lo}^{hi} k(x,y) dP(y)` for the base kernel.
fn closed_window(kernel: &Kernel, dist: &Component, x: f64, lo: f64, hi: f64) -> Option<f64> {
    let nu = kernel.nu();
    match (kernel.family(), dist) {
        (KernelFamily::UniformBox, d) => {
            Some(d.mass(lo.max(x - nu), hi.min(x + nu)) / (2.0 * nu))
        }
        (KernelFamily::Gaussian, Component::Gaussian { mu, sigma }) => {
            // N(y; x, ν²) N(y; μ, σ²) = N(x; μ, σ²+ν²) N(y; m, τ²)
            let s2 = sigma * sigma + nu * nu;
            let m = (x * sigma * sigma + mu * nu * nu) / s2;
            let tau = sigma * nu / s2.sqrt();
            let front = normal_pdf((x - mu) / s2.sqrt()) / s2.sqrt();
            Some(front * normal_mass((lo - m) / tau, (hi - m) / tau))
        }
        (KernelFamily::Gaussian, Component::Uniform { a, b }) => {
            let (l, h) = (lo.max(*a), hi.min(*b));
            Some(normal_mass((l - x) / nu, (h - x) / nu) / (b - a))
        }
        (KernelFamily::Gaussian, Component::Composite(parts)) => parts
            .iter()
            .map(|(w, c)| closed_window(kernel, c, x, lo, hi).map(|v| w * v))
            .sum(),
        _ => None,
    }
}

/// Simpson grid with `n_nodes` nodes over the union of the (truncated)
/// component supports.
pub fn working_grid(mixture: &Mixture, n_nodes: usize) -> Result<QuadratureGrid> {
    make_grid(mixture.support(), n_nodes, Rule::Simpson)
}

/// Piecewise form of `q²` for the triangular density centred at zero under
/// the box kernel with `ν < ½`: quadratic blends of width `2ν` around the
/// three kinks of the density and the density itself elsewhere.
pub fn triangular_box_q_sq(x: f64, nu: f64) -> f64 {
    debug_assert!(nu > 0.0 && nu < 0.5);
    let a = x.abs();
    if a < nu {
        1.0 - nu / 2.0 - x * x / (2.0 * nu)
    } else if a > 1.0 - nu && a < 1.0 + nu {
        (1.0 + nu - a).powi(2) / (4.0 * nu)
    } else {
        (1.0 - a).max(0.0)
    }
}

/// `q²` of `N(μ, σ²)` under the Gaussian kernel: `N(x; μ, σ² + ν²)`.
pub fn gaussian_gaussian_q_sq(x: f64, mu: f64, sigma: f64, nu: f64) -> f64 {
    let s = (sigma * sigma + nu * nu).sqrt();
    normal_pdf((x - mu) / s) / s
}

/// `k(x,y)/(q_left(x) q_right(y))`.
#[derive(Clone, Debug)]
pub struct NormalizedKernel {
    kernel: Kernel,
    left: KernelizedDensity,
    right: KernelizedDensity,
}

impl NormalizedKernel {
    /// Checks `q ≥ r_floor` for both densities on every node where their
    /// distribution has positive density.
    pub fn new(
        kernel: &Kernel,
        left: KernelizedDensity,
        right: KernelizedDensity,
        nodes: &[f64],
        r_floor: f64,
    ) -> Result<Self> {
        check_floor(&left, nodes, r_floor)?;
        check_floor(&right, nodes, r_floor)?;
        Ok(Self {
            kernel: *kernel,
            left,
            right,
        })
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.kernel.eval(x, y) / (self.left.q(x) * self.right.q(y))
    }

    pub fn left(&self) -> &KernelizedDensity {
        &self.left
    }

    pub fn right(&self) -> &KernelizedDensity {
        &self.right
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

/// Fails with `DensityUnderflow` if `q < r_floor` at a node inside the
/// support where the distribution's density is positive.
pub fn check_floor(q: &KernelizedDensity, nodes: &[f64], r_floor: f64) -> Result<()> {
    let dist = q.distribution();
    let (lo, hi) = dist.support();
    for &x in nodes {
        if x < lo || x > hi || dist.density(x) <= 0.0 {
            continue;
        }
        let v = q.q(x);
        if v < r_floor {
            return Err(Error::DensityUnderflow {
                x,
                value: v,
                floor: r_floor,
            });
        }
    }
    Ok(())
}

/// Kernelized densities of a mixture and of each of its components.
#[derive(Clone, Debug)]
pub struct MixtureDensities {
    pub mixture: KernelizedDensity,
    pub components: Vec<KernelizedDensity>,
}

impl MixtureDensities {
    pub fn new(kernel: &Kernel, mixture: &Mixture) -> Result<Self> {
        Ok(Self {
            mixture: KernelizedDensity::for_mixture(kernel, mixture)?,
            components: mixture
                .components()
                .iter()
                .map(|c| KernelizedDensity::new(kernel, c))
                .collect::<Result<_>>()?,
        })
    }

    /// `(q₁(x), …, q_K(x))`.
    pub fn embed(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|q| q.q(x)).collect()
    }

    pub fn all_closed(&self) -> bool {
        self.mixture.form() == DensityForm::Closed
            && self.components.iter().all(|q| q.form() == DensityForm::Closed)
    }
}

/// `(q₁(x), …, q_K(x))` for the components of `mixture`.
pub fn sqrt_density_embedding(mixture: &Mixture, kernel: &Kernel, x: f64) -> Result<Vec<f64>> {
    Ok(MixtureDensities::new(kernel, mixture)?.embed(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{gaussian_pair, triangular_pair};
    use crate::numerics::{make_grid, Rule};
    use approx::assert_abs_diff_eq;

    #[test]
    fn triangular_box_peak() {
        let k = Kernel::uniform_box(0.05).unwrap();
        let q = KernelizedDensity::new(&k, &Component::triangular(0.0).unwrap()).unwrap();
        assert_eq!(q.form(), DensityForm::Closed);
        assert_abs_diff_eq!(q.q_sq(0.0), 0.975, epsilon = 1e-14);
        assert_abs_diff_eq!(triangular_box_q_sq(0.0, 0.05), 0.975, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_gaussian_closed_form() {
        for nu in [0.5, 1.0, 2.0] {
            let k = Kernel::gaussian(nu).unwrap();
            let q = KernelizedDensity::new(&k, &Component::gaussian(0.0, 1.0).unwrap()).unwrap();
            let expected = 1.0 / (2.0 * std::f64::consts::PI * (nu * nu + 1.0)).sqrt();
            assert_abs_diff_eq!(q.q_sq(0.0), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn closed_and_quadrature_agree() {
        let cases: Vec<(Kernel, Component)> = vec![
            (Kernel::uniform_box(0.05).unwrap(), Component::triangular(0.0).unwrap()),
            (Kernel::uniform_box(0.3).unwrap(), Component::gaussian(1.0, 0.5).unwrap()),
            (Kernel::gaussian(2.0).unwrap(), Component::gaussian(6.0, 1.0).unwrap()),
            (Kernel::gaussian(0.15).unwrap(), Component::gaussian(0.0, 1.0).unwrap()),
            (Kernel::gaussian(0.7).unwrap(), Component::uniform(-1.0, 2.0).unwrap()),
        ];
        for (k, c) in cases {
            let closed = KernelizedDensity::new(&k, &c).unwrap();
            let quad = KernelizedDensity::quadrature(&k, &c).unwrap();
            let (a, b) = c.support();
            let grid = make_grid((a - 1.0, b + 1.0), 601, Rule::Simpson).unwrap();
            for &x in grid.nodes() {
                assert!((closed.q_sq(x) - quad.q_sq(x)).abs() < 1e-9, "{} at {x}", c.describe());
            }
        }
    }

    #[test]
    fn translation_property() {
        let k = Kernel::uniform_box(0.05).unwrap();
        let q1 = KernelizedDensity::new(&k, &Component::triangular(0.0).unwrap()).unwrap();
        let q2 = KernelizedDensity::new(&k, &Component::triangular(3.0).unwrap()).unwrap();
        for i in 0..100 {
            let x = -2.0 + 0.07 * i as f64;
            assert_abs_diff_eq!(q2.q_sq(x + 3.0), q1.q_sq(x), epsilon = 1e-14);
        }
    }

    #[test]
    fn mixture_decomposition_identity() {
        let p = gaussian_pair(4.0, 1.5).unwrap();
        let d = MixtureDensities::new(&p.kernel, &p.mixture).unwrap();
        for i in 0..50 {
            let x = -6.0 + 0.3 * i as f64;
            let parts: f64 = d
                .components
                .iter()
                .zip(p.mixture.weights())
                .map(|(q, w)| w * q.q_sq(x))
                .sum();
            assert_abs_diff_eq!(d.mixture.q_sq(x), parts, epsilon = 1e-10);
        }
    }

    #[test]
    fn normalized_kernel_halving_region() {
        let p = triangular_pair(3.0, 0.05).unwrap();
        let d = MixtureDensities::new(&p.kernel, &p.mixture).unwrap();
        let nodes: Vec<f64> = (0..400).map(|i| -1.2 + 0.015 * i as f64).collect();
        let kbar = NormalizedKernel::new(&p.kernel, d.mixture.clone(), d.mixture.clone(), &nodes, R_FLOOR)
            .unwrap();
        let q1 = d.components[0].clone();
        let k1 = NormalizedKernel::new(&p.kernel, q1.clone(), q1, &nodes, R_FLOOR).unwrap();
        for &(x, y) in &[(-0.5, -0.48), (0.2, 0.22), (1.0, 0.97), (0.0, 0.0)] {
            assert_abs_diff_eq!(k1.value(x, y), 0.5 * kbar.value(x, y), epsilon = 1e-12);
            assert_eq!(kbar.value(x, y), kbar.value(y, x));
        }
    }

    #[test]
    fn underflow_detected_in_gaussian_tail() {
        let k = Kernel::gaussian(0.1).unwrap();
        let q = KernelizedDensity::new(&k, &Component::gaussian(0.0, 1.0).unwrap()).unwrap();
        // the default floor holds up to the truncation point
        assert!(check_floor(&q, &[0.0, 5.0, 7.99], R_FLOOR).is_ok());
        assert!(matches!(
            check_floor(&q, &[7.9], 1e-6),
            Err(Error::DensityUnderflow { .. })
        ));
    }

    #[test]
    fn embedding_coordinates() {
        let p = gaussian_pair(40.0, 2.0).unwrap();
        let v = sqrt_density_embedding(&p.mixture, &p.kernel, 0.0).unwrap();
        let expected = (2.0 * std::f64::consts::PI * 5.0).powf(-0.25);
        assert_abs_diff_eq!(v[0], expected, epsilon = 1e-14);
        assert!(v[1] < 1e-30);
        let t = triangular_pair(3.0, 0.05).unwrap();
        let far = sqrt_density_embedding(&t.mixture, &t.kernel, 50.0).unwrap();
        assert_eq!(far, vec![0.0, 0.0]);
    }

    #[test]
    fn window_integral_closed_matches_quadrature() {
        let cases: Vec<(Kernel, Component)> = vec![
            (Kernel::uniform_box(0.05).unwrap(), Component::triangular(0.0).unwrap()),
            (Kernel::gaussian(1.3).unwrap(), Component::gaussian(0.5, 1.0).unwrap()),
            (Kernel::gaussian(0.4).unwrap(), Component::uniform(-1.0, 1.0).unwrap()),
        ];
        for (k, c) in cases {
            let closed = KernelizedDensity::new(&k, &c).unwrap();
            let quad = KernelizedDensity::quadrature(&k, &c).unwrap();
            for &(x, lo, hi) in &[(0.0, 0.1, 9.0), (0.3, -9.0, 0.32), (-0.5, -0.6, 0.4)] {
                let a = closed.window_integral(x, lo, hi);
                let b = quad.window_integral(x, lo, hi);
                assert!((a - b).abs() < 1e-10, "{} x={x}: {a} vs {b}", c.describe());
            }
            assert_abs_diff_eq!(closed.window_integral(0.2, -20.0, 20.0), closed.q_sq(0.2), epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_linear_kernel() {
        assert!(KernelizedDensity::new(&Kernel::linear(), &Component::uniform(0.0, 1.0).unwrap()).is_err());
    }
}
