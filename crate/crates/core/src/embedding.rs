//! Finite-sample spectral embedding: kernel matrix, normalized Laplacian
//! matrix `L = D^{-1/2} A D^{-1/2}`, and the map of each point to the
//! corresponding row of the top-`K` eigenvectors of `L`.

use crate::error::{Error, Result};
use crate::kernel::{kernel_matrix, kernel_matrix_nd, Kernel};
use crate::numerics::{sym_eigen, Matrix};

/// Eigengap below which the embedding is flagged as ill-defined.
pub const EIGENGAP_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedDataset {
    /// Row `i` is `Φ_n(X_i) = (v_{1i}, …, v_{Ki})`.
    pub points: Vec<Vec<f64>>,
    /// Latent labels in `0..K`, when known.
    pub labels: Option<Vec<usize>>,
    /// Top `K` eigenvalues of `L`, descending.
    pub eigenvalues: Vec<f64>,
    pub source_seed: Option<u64>,
    /// `(λ_K, λ_{K+1})` when the eigengap is below [`EIGENGAP_FLOOR`].
    pub gap_warning: Option<(f64, f64)>,
}

impl EmbeddedDataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn with_labels(mut self, labels: Vec<usize>, seed: Option<u64>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                left: self.points.len(),
                right: labels.len(),
            });
        }
        self.labels = Some(labels);
        self.source_seed = seed;
        Ok(self)
    }
}

/// `D_ii = Σ_j A_ij`.
pub fn row_sums(a: &Matrix) -> Vec<f64> {
    (0..a.rows()).map(|i| a.row(i).iter().sum()).collect()
}

/// `L = D^{-1/2} A D^{-1/2}`; exactly symmetric when `A` is.
pub fn laplacian_matrix(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let d = row_sums(a);
    let mut inv = Vec::with_capacity(d.len());
    for (row, &s) in d.iter().enumerate() {
        if s <= 0.0 {
            return Err(Error::ZeroRowSum { row });
        }
        inv.push(1.0 / s.sqrt());
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = a[(i, j)] * inv[i] * inv[j];
            l[(i, j)] = v;
            l[(j, i)] = v;
        }
    }
    Ok(l)
}

/// Embedding of one-dimensional points.
pub fn embed(points: &[f64], kernel: &Kernel, k: usize) -> Result<EmbeddedDataset> {
    check_count(points.len(), k)?;
    embed_matrix(&kernel_matrix(kernel, points), k)
}

/// Embedding of points in `ℝ^d`.
pub fn embed_nd(points: &[Vec<f64>], kernel: &Kernel, k: usize) -> Result<EmbeddedDataset> {
    check_count(points.len(), k)?;
    if let Some(first) = points.first() {
        if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: bad.len(),
            });
        }
    }
    embed_matrix(&kernel_matrix_nd(kernel, points), k)
}

/// Embedding from a precomputed kernel matrix.
pub fn embed_matrix(a: &Matrix, k: usize) -> Result<EmbeddedDataset> {
    check_count(a.rows(), k)?;
    let l = laplacian_matrix(a)?;
    let n = l.rows();
    let want = (k + 1).min(n);
    let eig = sym_eigen(&l, Some(want))?;
    let gap_warning = (want > k)
        .then(|| (eig.values[k - 1], eig.values[k]))
        .filter(|(a, b)| a - b < EIGENGAP_FLOOR);
    let points = (0..n).map(|i| eig.vectors.row(i)[..k].to_vec()).collect();
    Ok(EmbeddedDataset {
        points,
        labels: None,
        eigenvalues: eig.values[..k].to_vec(),
        source_seed: None,
        gap_warning,
    })
}

fn check_count(n: usize, k: usize) -> Result<()> {
    if k == 0 || n < k {
        return Err(Error::BadParameter {
            name: "K",
            value: k as f64,
            reason: "need 1 ≤ K ≤ number of points",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::gaussian_pair;
    use crate::numerics::{dot, sym_eigenvalues, Rng};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_kernel_on_two_points() {
        let a = Matrix::from_rows(&[vec![0.3, 0.3], vec![0.3, 0.3]]);
        let l = laplacian_matrix(&a).unwrap();
        for v in l.as_slice() {
            assert_relative_eq!(*v, 0.5, max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_row_sum_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(laplacian_matrix(&a), Err(Error::ZeroRowSum { row: 1 })));
    }

    #[test]
    fn regularized_kernel_rules_out_zero_row_sums() {
        let k = Kernel::uniform_box(0.01).unwrap().regularized(0.05).unwrap();
        let e = embed(&[0.0, 5.0, 10.0], &k, 1).unwrap();
        assert_eq!(e.len(), 3);
        let plain = Kernel::uniform_box(0.01).unwrap();
        let a = kernel_matrix(&plain, &[0.0, 5.0, 10.0]);
        assert!(laplacian_matrix(&a).is_ok());
    }

    #[test]
    fn far_apart_clusters_embed_on_orthogonal_rays() {
        let pts: Vec<f64> = (0..10).map(|i| 0.01 * i as f64).chain((0..8).map(|i| 50.0 + 0.01 * i as f64)).collect();
        let e = embed(&pts, &Kernel::uniform_box(1.0).unwrap(), 2).unwrap();
        assert_relative_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-12);
        for i in 0..10 {
            for j in 10..18 {
                assert!(dot(&e.points[i], &e.points[j]).abs() < 1e-12);
            }
        }
        let c = dot(&e.points[0], &e.points[1]) / (dot(&e.points[0], &e.points[0]) * dot(&e.points[1], &e.points[1])).sqrt();
        assert_relative_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_cluster_is_one_signed() {
        let mut rng = Rng::new(3);
        let pts: Vec<f64> = (0..50).map(|_| rng.gaussian()).collect();
        let e = embed(&pts, &Kernel::gaussian(1.0).unwrap(), 1).unwrap();
        assert!(e.points.iter().all(|p| p[0] > 0.0));
    }

    #[test]
    fn top_eigenvector_is_root_degree() {
        let mut rng = Rng::new(11);
        let pts: Vec<f64> = (0..40).map(|_| 3.0 * rng.gaussian()).collect();
        let a = kernel_matrix(&Kernel::gaussian(0.7).unwrap(), &pts);
        let d = row_sums(&a);
        let e = embed_matrix(&a, 2).unwrap();
        assert_relative_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-8);
        let nd = d.iter().sum::<f64>().sqrt();
        for (p, di) in e.points.iter().zip(&d) {
            assert_relative_eq!(p[0], di.sqrt() / nd, epsilon = 1e-8);
        }
        let cols: Vec<f64> = e.points.iter().map(|p| p[0] * p[1]).collect();
        assert!(cols.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let pts = vec![vec![0.0, 1.0], vec![2.0]];
        assert!(matches!(
            embed_nd(&pts, &Kernel::gaussian(1.0).unwrap(), 1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(embed(&[0.0], &Kernel::gaussian(1.0).unwrap(), 2).is_err());
    }

    #[test]
    fn sampled_pair_embeds_with_a_clear_gap() {
        let p = gaussian_pair(6.0, 2.0).unwrap();
        let mut rng = Rng::new(42);
        let s = p.mixture.sample(300, &mut rng);
        let xs: Vec<f64> = s.iter().map(|v| v.x).collect();
        let e = embed(&xs, &p.kernel.regularized(0.05).unwrap(), 2).unwrap();
        assert!(e.gap_warning.is_none());
        assert!(e.eigenvalues[1] > 0.5);
    }

    proptest! {
        #[test]
        fn laplacian_spectrum_in_unit_interval(seed in any::<u64>(), n in 2usize..30, nu in 0.2f64..3.0) {
            let mut rng = Rng::new(seed);
            let pts: Vec<f64> = (0..n).map(|_| 4.0 * rng.gaussian()).collect();
            let l = laplacian_matrix(&kernel_matrix(&Kernel::gaussian(nu).unwrap(), &pts)).unwrap();
            prop_assert_eq!(l.asymmetry(), 0.0);
            let ev = sym_eigenvalues(&l).unwrap();
            prop_assert!(ev[0] <= 1.0 + 1e-10);
            prop_assert!(*ev.last().unwrap() >= -1e-10);
            prop_assert!((ev[0] - 1.0).abs() < 1e-10);
        }

        #[test]
        fn embedding_is_permutation_equivariant(seed in any::<u64>(), n in 3usize..25) {
            let mut rng = Rng::new(seed);
            let pts: Vec<f64> = (0..n).map(|_| 3.0 * rng.gaussian()).collect();
            let k = Kernel::gaussian(1.0).unwrap();
            let base = embed(&pts, &k, 1).unwrap();
            // a nearly disconnected sample has no unique top eigenvector
            let ev = sym_eigenvalues(&laplacian_matrix(&kernel_matrix(&k, &pts)).unwrap()).unwrap();
            prop_assume!(ev[0] - ev[1] > 1e-3);
            let perm: Vec<usize> = (0..n).rev().collect();
            let permuted: Vec<f64> = perm.iter().map(|&i| pts[i]).collect();
            let e = embed(&permuted, &k, 1).unwrap();
            for (row, &i) in perm.iter().enumerate() {
                prop_assert!((e.points[row][0] - base.points[i][0]).abs() < 1e-9);
            }
        }
    }
}
