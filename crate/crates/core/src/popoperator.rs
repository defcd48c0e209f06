//! Discretized population operators: the normalized Laplacian operator on a
//! quadrature grid, the subspaces Q and R, the distance ρ(Q, R), and
//! numerical checks of the subspace perturbation bound, its two supporting
//! lemmas, and Cheeger's inequality.
//!
//! Functions on the grid are represented in weighted coordinates
//! `f ↦ f · √(p(x_i) w_i)`, in which the operator `∫ k̄(·, y) f(y) dP(y)`
//! becomes a symmetric matrix. Kernelized densities are evaluated by the
//! same nodal rule (`q²(x_i) = Σ_j k(x_i, x_j) p(x_j) w_j`), so `q̄` is an
//! exact eigenvector of the discrete operator.

use crate::density::working_grid;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::mixture::{Component, Mixture};
use crate::numerics::{
    make_grid, orthonormalize_columns, sym_eigen, sym_eigenvalues, Matrix, QuadratureGrid, Rule, SymEigen,
};
use crate::params::{self, Diagnostics, GammaMethod, Method};

pub const DEFAULT_NODES: usize = 601;
/// Largest change of the top eigenvalues tolerated when the grid is refined.
pub const REFINEMENT_TOLERANCE: f64 = 1e-4;
/// Gram condition number above which Q is declared rank deficient.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;
/// Eigengap below which R is flagged as ill-defined.
pub const EIGENGAP_FLOOR: f64 = 1e-10;

/// `√(p(x_i) w_i)` for a density `p` on `grid`.
fn root_weights(grid: &QuadratureGrid, density: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .map(|(&x, &w)| (density(x) * w).max(0.0).sqrt())
        .collect()
}

/// Nodal kernelized densities `q²(x_i) = Σ_j k(x_i, x_j) p(x_j) w_j`.
fn nodal_q_sq(kernel: &Kernel, nodes: &[f64], root_w: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .map(|&x| {
            nodes
                .iter()
                .zip(root_w)
                .map(|(&y, r)| kernel.eval(x, y) * r * r)
                .sum()
        })
        .collect()
}

/// Symmetric matrix `k(x_i,x_j)/(q_i q_j) · r_i r_j` with `r = √(p w)`.
fn normalized_matrix(kernel: &Kernel, nodes: &[f64], root_w: &[f64], q: &[f64]) -> Matrix {
    let n = nodes.len();
    let scaled: Vec<f64> = root_w
        .iter()
        .zip(q)
        .map(|(r, q)| if *r == 0.0 || *q == 0.0 { 0.0 } else { r / q })
        .collect();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        if scaled[i] == 0.0 {
            continue;
        }
        for j in i..n {
            let v = kernel.eval(nodes[i], nodes[j]) * scaled[i] * scaled[j];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// The normalized Laplacian operator of a mixture on a quadrature grid.
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    pub grid: QuadratureGrid,
    /// Mixture density `p̄` at the nodes.
    pub density: Vec<f64>,
    /// `√(p̄(x_i) w_i)`.
    pub root_weights: Vec<f64>,
    /// Nodal `q̄(x_i)`.
    pub q_bar: Vec<f64>,
    pub matrix: Matrix,
    /// Leading eigenpairs (at least `K + 1` of them).
    pub eigen: SymEigen,
    kernel: Kernel,
    mixture: Mixture,
}

impl DiscretizedOperator {
    /// Assembles the operator and its leading `K + 1` eigenpairs.
    pub fn new(mixture: &Mixture, kernel: &Kernel, grid: QuadratureGrid) -> Result<Self> {
        let nodes = grid.nodes().to_vec();
        let density: Vec<f64> = nodes.iter().map(|&x| mixture.density(x)).collect();
        let root_w = root_weights(&grid, |x| mixture.density(x));
        let q_sq = nodal_q_sq(kernel, &nodes, &root_w);
        let q_bar: Vec<f64> = q_sq.iter().map(|v| v.max(0.0).sqrt()).collect();
        for (i, (&r, &q)) in root_w.iter().zip(&q_bar).enumerate() {
            if r > 0.0 && q <= 0.0 {
                return Err(Error::DensityUnderflow {
                    x: nodes[i],
                    value: q,
                    floor: 0.0,
                });
            }
        }
        let matrix = normalized_matrix(kernel, &nodes, &root_w, &q_bar);
        let want = (mixture.k() + 1).min(nodes.len());
        let eigen = sym_eigen(&matrix, Some(want))?;
        Ok(Self {
            grid,
            density,
            root_weights: root_w,
            q_bar,
            matrix,
            eigen,
            kernel: *kernel,
            mixture: mixture.clone(),
        })
    }

    /// Operator on the default Simpson grid with `n_nodes` nodes over the
    /// mixture support.
    pub fn on_default_grid(mixture: &Mixture, kernel: &Kernel, n_nodes: usize) -> Result<Self> {
        Self::new(mixture, kernel, working_grid(mixture, n_nodes)?)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn mixture(&self) -> &Mixture {
        &self.mixture
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// The leading eigenvalues, descending.
    pub fn top_eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `√(p̄ w) q̄`, which the operator maps to itself.
    pub fn q_bar_vector(&self) -> Vec<f64> {
        self.root_weights.iter().zip(&self.q_bar).map(|(r, q)| r * q).collect()
    }

    /// Rebuilds on the refined grid and fails with `GridTooCoarse` if any of
    /// the top `K` eigenvalues moves by more than `tolerance`.
    pub fn check_refinement(&self, tolerance: f64) -> Result<()> {
        let fine = Self::new(&self.mixture, &self.kernel, self.grid.refined())?;
        let k = self.mixture.k();
        let change = self.eigen.values[..k]
            .iter()
            .zip(&fine.eigen.values[..k])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change > tolerance {
            return Err(Error::GridTooCoarse {
                quantity: "operator eigenvalues",
                change,
                tolerance,
            });
        }
        Ok(())
    }
}

/// An orthonormal basis (columns) in the weighted grid coordinates.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: Matrix,
    /// `(λ_K, λ_{K+1})` when the eigengap defining the subspace is below
    /// [`EIGENGAP_FLOOR`].
    pub gap_warning: Option<(f64, f64)>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn projector(&self) -> Matrix {
        Matrix::projector(&self.basis)
    }

    /// `‖BᵀB − I‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.basis.transpose_matmul(&self.basis);
        g.sub(&Matrix::identity(g.rows())).frobenius_norm()
    }
}

/// Vectors `√(p̄ w) q_m` for every component, as columns.
pub fn component_vectors(op: &DiscretizedOperator) -> Matrix {
    let nodes = op.grid.nodes();
    let mixture = op.mixture();
    let cols: Vec<Vec<f64>> = mixture
        .components()
        .iter()
        .map(|c| {
            let rw = root_weights(&op.grid, |x| c.density(x));
            nodal_q_sq(op.kernel(), nodes, &rw)
                .iter()
                .zip(&op.root_weights)
                .map(|(q2, r)| r * q2.max(0.0).sqrt())
                .collect()
        })
        .collect();
    Matrix::from_columns(&cols)
}

/// `Q = span{q_1, …, q_K}`.
pub fn subspace_q(op: &DiscretizedOperator) -> Result<Subspace> {
    let mut v = component_vectors(op);
    let gram = v.transpose_matmul(&v);
    let ev = sym_eigenvalues(&gram)?;
    let (hi, lo) = (ev[0], *ev.last().expect("K ≥ 1"));
    let condition = if lo <= 0.0 { f64::INFINITY } else { hi / lo };
    if condition > GRAM_CONDITION_LIMIT {
        return Err(Error::RankDeficient { condition });
    }
    orthonormalize_columns(&mut v);
    Ok(Subspace {
        basis: v,
        gap_warning: None,
    })
}

/// `R` = span of the top `k` eigenvectors of the operator.
pub fn subspace_r(op: &DiscretizedOperator, k: usize) -> Result<Subspace> {
    let have = op.eigen.values.len();
    if k == 0 || k > have {
        return Err(Error::DimensionMismatch {
            expected: have,
            found: k,
        });
    }
    let basis = op.eigen.vectors.leading_columns(k);
    let gap_warning = (k < have)
        .then(|| (op.eigen.values[k - 1], op.eigen.values[k]))
        .filter(|(a, b)| a - b <= EIGENGAP_FLOOR);
    Ok(Subspace { basis, gap_warning })
}

/// `ρ(Q, R) = ‖Π_Q − Π_R‖_F`.
pub fn rho_distance(q: &Subspace, r: &Subspace) -> Result<f64> {
    if q.basis.rows() != r.basis.rows() {
        return Err(Error::DimensionMismatch {
            expected: q.basis.rows(),
            found: r.basis.rows(),
        });
    }
    // ‖P − R‖²_F = dim Q + dim R − 2‖QᵀR‖²_F
    let cross = q.basis.transpose_matmul(&r.basis).frobenius_norm();
    let sq = (q.dim() + r.dim()) as f64 - 2.0 * cross * cross;
    Ok(sq.max(0.0).sqrt())
}

/// Both sides of the subspace perturbation bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Report {
    pub rho: f64,
    /// `16 √(12 + b_max) φ`.
    pub bound: f64,
    /// Whether `φ ≤ Γ² / (576 √(12 + b_max))`.
    pub hypothesis_ok: bool,
    pub diagnostics: Diagnostics,
}

impl Theorem1Report {
    pub fn holds(&self) -> bool {
        !self.hypothesis_ok || self.rho <= self.bound
    }
}

pub fn theorem1_bound(d: &Diagnostics) -> f64 {
    16.0 * (12.0 + d.b_max).sqrt() * d.phi
}

pub fn theorem1_hypothesis(d: &Diagnostics) -> bool {
    d.phi <= d.gamma.value * d.gamma.value / (576.0 * (12.0 + d.b_max).sqrt())
}

/// Parameters with closed forms where known and `b_max` on the operator grid.
pub fn diagnostics_for(op: &DiscretizedOperator) -> Result<Diagnostics> {
    params::difficulty(op.mixture(), op.kernel(), Method::Closed, op.grid.nodes())
}

pub fn theorem1_check(op: &DiscretizedOperator, diagnostics: &Diagnostics) -> Result<Theorem1Report> {
    let k = op.mixture().k();
    if k < 2 {
        return Err(Error::BadParameter {
            name: "K",
            value: k as f64,
            reason: "the subspace bound needs at least two components",
        });
    }
    let rho = rho_distance(&subspace_q(op)?, &subspace_r(op, k)?)?;
    Ok(Theorem1Report {
        rho,
        bound: theorem1_bound(diagnostics),
        hypothesis_ok: theorem1_hypothesis(diagnostics),
        diagnostics: *diagnostics,
    })
}

/// Discretized block quantities of the operator split along `Q ⊕ Q⊥`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaReport {
    /// `‖Π_{Q⊥} T̄ Π_Q‖_F`.
    pub hs_g: f64,
    /// `√(K(12 + b_max))/w_min · √(S + C)`.
    pub hs_g_bound: f64,
    pub sigma_min_a: f64,
    /// `1 − 13K√(S + C)`.
    pub sigma_min_a_bound: f64,
    pub sigma_max_b: f64,
    /// `1 − Γ²/8 + 3√(S + C)/w_min`.
    pub sigma_max_b_bound: f64,
    /// Distance between the spectra of the two diagonal blocks.
    pub sep: f64,
    /// `Γ²/16`.
    pub sep_bound: f64,
}

impl LemmaReport {
    pub fn hs_bound_holds(&self) -> bool {
        self.hs_g <= self.hs_g_bound
    }

    pub fn sigma_min_holds(&self) -> bool {
        self.sigma_min_a >= self.sigma_min_a_bound
    }

    pub fn sigma_max_holds(&self) -> bool {
        self.sigma_max_b <= self.sigma_max_b_bound
    }

    pub fn sep_holds(&self) -> bool {
        self.sep >= self.sep_bound
    }
}

pub fn lemma_checks(op: &DiscretizedOperator, d: &Diagnostics) -> Result<LemmaReport> {
    let q = subspace_q(op)?;
    let basis = &q.basis;
    let n = basis.rows();
    let k = basis.cols();
    let m = &op.matrix;

    let mq = m.matmul(basis);
    // A = Qᵀ M Q
    let a = basis.transpose_matmul(&mq);
    let a = symmetrize(&a);
    let a_eigs = sym_eigenvalues(&a)?;
    let sigma_min_a = a_eigs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);

    // G = (I − P) M Q
    let g = mq.sub(&basis.matmul(&basis.transpose_matmul(&mq)));
    let hs_g = g.frobenius_norm();

    // B = (I − P) M (I − P); the Q directions are shifted out of the way so
    // the remaining eigenvalues are exactly the spectrum on Q⊥
    let p = q.projector();
    let ip = Matrix::identity(n).sub(&p);
    let mut b = ip.matmul(m).matmul(&ip);
    let shift = 10.0 + m.frobenius_norm();
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] += shift * p[(i, j)];
        }
    }
    let b = symmetrize(&b);
    let b_eigs = sym_eigenvalues(&b)?;
    let b_spec = &b_eigs[k..];
    let sigma_max_b = b_spec.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut sep = f64::INFINITY;
    for av in &a_eigs {
        for bv in b_spec {
            sep = sep.min((av - bv).abs());
        }
    }

    let root = d.overlap().sqrt();
    let g2 = d.gamma.value * d.gamma.value;
    Ok(LemmaReport {
        hs_g,
        hs_g_bound: ((k as f64) * (12.0 + d.b_max)).sqrt() / d.w_min * root,
        sigma_min_a,
        sigma_min_a_bound: 1.0 - 13.0 * k as f64 * root,
        sigma_max_b,
        sigma_max_b_bound: 1.0 - g2 / 8.0 + 3.0 * root / d.w_min,
        sep,
        sep_bound: g2 / 16.0,
    })
}

fn symmetrize(m: &Matrix) -> Matrix {
    let n = m.rows();
    Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Cheeger sandwich `1 − Γ²/8 ≥ λ₂ ≥ 1 − Γ` for one distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheegerReport {
    pub gamma: f64,
    pub lambda2: f64,
    /// `1 − Γ²/8`.
    pub upper: f64,
    /// `1 − Γ`.
    pub lower: f64,
}

impl CheegerReport {
    pub fn holds(&self, allowance: f64) -> bool {
        self.lambda2 <= self.upper + allowance && self.lambda2 >= self.lower - allowance
    }
}

/// The normalized operator of a single distribution on a Simpson grid over
/// its support; returns its two leading eigenvalues.
pub fn component_top_eigenvalues(dist: &Component, kernel: &Kernel, n_nodes: usize) -> Result<(f64, f64)> {
    let grid = make_grid(dist.support(), n_nodes, Rule::Simpson)?;
    let nodes = grid.nodes().to_vec();
    let rw = root_weights(&grid, |x| dist.density(x));
    let q: Vec<f64> = nodal_q_sq(kernel, &nodes, &rw).iter().map(|v| v.max(0.0).sqrt()).collect();
    let m = normalized_matrix(kernel, &nodes, &rw, &q);
    let e = sym_eigen(&m, Some(2))?;
    Ok((e.values[0], e.values[1]))
}

pub fn cheeger_check(dist: &Component, kernel: &Kernel, n_nodes: usize) -> Result<CheegerReport> {
    let gamma = params::indivisibility(dist, kernel, GammaMethod::Auto)?.value;
    let (_, lambda2) = component_top_eigenvalues(dist, kernel, n_nodes)?;
    Ok(CheegerReport {
        gamma,
        lambda2,
        upper: 1.0 - gamma * gamma / 8.0,
        lower: 1.0 - gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{gaussian_pair, triangular_bad, triangular_pair};
    use crate::numerics::dot;
    use approx::assert_relative_eq;

    fn single_gaussian() -> Mixture {
        Mixture::new(vec![Component::gaussian(0.0, 1.0).unwrap()], vec![1.0]).unwrap()
    }

    #[test]
    fn single_component_top_eigenpair_is_q_bar() {
        for nu in [0.5, 1.0, 2.0] {
            let k = Kernel::gaussian(nu).unwrap();
            let op = DiscretizedOperator::on_default_grid(&single_gaussian(), &k, 301).unwrap();
            assert_relative_eq!(op.eigen.values[0], 1.0, epsilon = 1e-8);
            let mut v = op.q_bar_vector();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            let c = dot(&v, &op.eigen.vector(0)).abs();
            assert_relative_eq!(c, 1.0, epsilon = 1e-8);
            let q = subspace_q(&op).unwrap();
            let r = subspace_r(&op, 1).unwrap();
            assert!(rho_distance(&q, &r).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn spectrum_within_unit_interval_for_gaussian_kernel() {
        let p = gaussian_pair(6.0, 2.0).unwrap();
        let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, 301).unwrap();
        let all = sym_eigenvalues(&op.matrix).unwrap();
        assert!(all[0] <= 1.0 + 1e-8);
        assert!(*all.last().unwrap() >= -1e-8);
        assert!(op.eigen.values[1] - op.eigen.values[2] > 0.0);
    }

    #[test]
    fn separated_pair_has_second_eigenvalue_near_one() {
        let p = gaussian_pair(12.0, 1.0).unwrap();
        let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, 601).unwrap();
        assert!(op.eigen.values[1] > 0.999, "{:?}", op.eigen.values);
    }

    #[test]
    fn rho_elementary_cases() {
        let e1 = Subspace {
            basis: Matrix::from_columns(&[vec![1.0, 0.0, 0.0]]),
            gap_warning: None,
        };
        let e2 = Subspace {
            basis: Matrix::from_columns(&[vec![0.0, 1.0, 0.0]]),
            gap_warning: None,
        };
        assert_eq!(rho_distance(&e1, &e1).unwrap(), 0.0);
        assert_relative_eq!(rho_distance(&e1, &e2).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        let short = Subspace {
            basis: Matrix::from_columns(&[vec![1.0, 0.0]]),
            gap_warning: None,
        };
        assert!(matches!(rho_distance(&e1, &short), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rho_matches_projector_difference() {
        let p = gaussian_pair(4.0, 2.0).unwrap();
        let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, 201).unwrap();
        let q = subspace_q(&op).unwrap();
        let r = subspace_r(&op, 2).unwrap();
        let direct = q.projector().sub(&r.projector()).frobenius_norm();
        assert_relative_eq!(rho_distance(&q, &r).unwrap(), direct, epsilon = 1e-10);
        let pq = q.projector();
        assert!(pq.matmul(&pq).sub(&pq).frobenius_norm() <= 1e-10);
        assert!(q.orthonormality_error() <= 1e-10);
    }

    #[test]
    fn disjoint_box_pair_has_orthogonal_q_and_invariant_subspace() {
        let p = triangular_pair(2.5, 0.05).unwrap();
        let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, 601).unwrap();
        let v = component_vectors(&op);
        let g = v.transpose_matmul(&v);
        assert_eq!(g[(0, 1)], 0.0);
        let d = diagnostics_for(&op).unwrap();
        let lemma = lemma_checks(&op, &d).unwrap();
        assert!(lemma.hs_g < 1e-10, "{lemma:?}");
    }

    #[test]
    fn identical_components_are_rank_deficient() {
        let m = Mixture::equal_weights(vec![
            Component::gaussian(0.0, 1.0).unwrap(),
            Component::gaussian(0.0, 1.0).unwrap(),
        ])
        .unwrap();
        let op = DiscretizedOperator::on_default_grid(&m, &Kernel::gaussian(1.0).unwrap(), 101).unwrap();
        assert!(matches!(subspace_q(&op), Err(Error::RankDeficient { .. })));
        assert!(subspace_r(&op, 2).is_ok());
    }

    #[test]
    fn theorem1_rejects_single_component() {
        let k = Kernel::gaussian(1.0).unwrap();
        let op = DiscretizedOperator::on_default_grid(&single_gaussian(), &k, 101).unwrap();
        assert!(diagnostics_for(&op).is_err());
        let pair = gaussian_pair(6.0, 1.0).unwrap();
        let pair_op = DiscretizedOperator::on_default_grid(&pair.mixture, &pair.kernel, 101).unwrap();
        let d = diagnostics_for(&pair_op).unwrap();
        assert!(matches!(theorem1_check(&op, &d), Err(Error::BadParameter { .. })));
    }

    #[test]
    fn theorem1_guard_on_heavy_overlap() {
        let p = gaussian_pair(2.0, 2.0).unwrap();
        let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, 201).unwrap();
        let d = diagnostics_for(&op).unwrap();
        let r = theorem1_check(&op, &d).unwrap();
        assert!(!r.hypothesis_ok);
        assert!(r.holds());
    }

    #[test]
    fn theorem1_holds_in_well_separated_regime() {
        let p = gaussian_pair(16.0, 2.0).unwrap();
        let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, 601).unwrap();
        let d = diagnostics_for(&op).unwrap();
        let r = theorem1_check(&op, &d).unwrap();
        assert!(r.hypothesis_ok, "{r:?}");
        assert!(r.rho <= r.bound);
        let l = lemma_checks(&op, &d).unwrap();
        assert!(l.hs_bound_holds() && l.sigma_min_holds() && l.sigma_max_holds() && l.sep_holds(), "{l:?}");
        assert!(l.sigma_max_b < l.sigma_min_a);
    }

    #[test]
    fn cheeger_sandwich_on_unimodal_components() {
        let g = cheeger_check(&Component::gaussian(0.0, 1.0).unwrap(), &Kernel::gaussian(1.0).unwrap(), 401).unwrap();
        assert_relative_eq!(g.gamma, 2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(g.upper, 17.0 / 18.0, max_relative = 1e-12);
        assert!(g.holds(1e-3), "{g:?}");
        let t = cheeger_check(&Component::triangular(0.0).unwrap(), &Kernel::uniform_box(1.0).unwrap(), 401).unwrap();
        assert!(t.holds(1e-3), "{t:?}");
    }

    #[test]
    fn cheeger_sandwich_on_split_component() {
        let p = triangular_bad(4.0, 0.05).unwrap();
        let bad = p.mixture.component(0);
        let r = cheeger_check(bad, &p.kernel, 801).unwrap();
        assert!(r.gamma < 1e-12);
        assert!(r.lambda2 > 1.0 - 1e-9, "{r:?}");
        assert!(r.holds(1e-3));
    }

    #[test]
    fn refinement_check_passes_on_default_grid() {
        let p = gaussian_pair(6.0, 2.0).unwrap();
        let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, DEFAULT_NODES).unwrap();
        op.check_refinement(REFINEMENT_TOLERANCE).unwrap();
        let coarse = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, 5).unwrap();
        assert!(matches!(coarse.check_refinement(1e-12), Err(Error::GridTooCoarse { .. })));
    }
}
