//! Orthogonal cone structure (OCS) certificates and the spherical K-means
//! update on embedded data, with misclustering accounting.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::numerics::{dot, norm2, orthonormalize_columns, sym_eigen, Matrix, Rng};

/// Exhaustive label matching is used up to this many clusters.
pub const EXHAUSTIVE_MATCH_LIMIT: usize = 8;

/// `arccos(⟨u, v⟩/(‖u‖‖v‖))` with the cosine clamped to `[−1, 1]`.
pub fn angle_between(u: &[f64], v: &[f64]) -> Result<f64> {
    let (nu, nv) = (norm2(u), norm2(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0).acos())
}

/// A basis `e_1..e_K` (with `e_m` paired to label `m`) under which every
/// cluster has at least a `1 − α` fraction of its points within angle `θ`
/// of its axis.
#[derive(Clone, Debug, PartialEq)]
pub struct OcsCertificate {
    pub basis: Vec<Vec<f64>>,
    pub theta: f64,
    pub alpha: f64,
    pub per_cluster_alpha: Vec<f64>,
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < FRAC_PI_4 {
        Ok(())
    } else {
        Err(Error::BadTheta { theta })
    }
}

/// Indices of each label class; fails if any of `0..k` is empty.
fn classes(labels: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new(); k];
    for (i, &z) in labels.iter().enumerate() {
        if z >= k {
            return Err(Error::DimensionMismatch { expected: k, found: z });
        }
        out[z].push(i);
    }
    if let Some(label) = out.iter().position(Vec::is_empty) {
        return Err(Error::EmptyCluster { label });
    }
    Ok(out)
}

fn check_lengths(points: &[Vec<f64>], labels: &[usize]) -> Result<()> {
    if points.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: labels.len(),
        });
    }
    Ok(())
}

/// Fraction of each class lying outside the cone of half-angle `theta`
/// around its basis vector. Zero vectors count as outside.
pub fn ocs_alpha(points: &[Vec<f64>], labels: &[usize], basis: &[Vec<f64>], theta: f64) -> Result<OcsCertificate> {
    check_theta(theta)?;
    check_lengths(points, labels)?;
    let k = basis.len();
    let cls = classes(labels, k)?;
    let per_cluster_alpha: Vec<f64> = cls
        .iter()
        .enumerate()
        .map(|(m, idx)| {
            let inside = idx
                .iter()
                .filter(|&&i| angle_between(&points[i], &basis[m]).is_ok_and(|a| a < theta))
                .count();
            1.0 - inside as f64 / idx.len() as f64
        })
        .collect();
    let alpha = per_cluster_alpha.iter().copied().fold(0.0, f64::max);
    Ok(OcsCertificate {
        basis: basis.to_vec(),
        theta,
        alpha,
        per_cluster_alpha,
    })
}

/// Heuristic certificate: per-class mean directions of the normalized
/// points, replaced by the nearest orthonormal basis (polar factor), then
/// the best of all `K!` pairings of basis vectors with labels.
pub fn ocs_search(points: &[Vec<f64>], labels: &[usize], theta: f64) -> Result<OcsCertificate> {
    check_theta(theta)?;
    check_lengths(points, labels)?;
    let k = points.first().map_or(0, Vec::len);
    let cls = classes(labels, k)?;
    let means: Vec<Vec<f64>> = cls
        .iter()
        .map(|idx| {
            let mut m = vec![0.0; k];
            for &i in idx {
                let nrm = norm2(&points[i]);
                if nrm > 0.0 {
                    m.iter_mut().zip(&points[i]).for_each(|(a, b)| *a += b / nrm);
                }
            }
            m
        })
        .collect();
    let basis = polar_rows(&Matrix::from_rows(&means))?;
    let mut best: Option<OcsCertificate> = None;
    for perm in (0..k).permutations(k) {
        let assigned: Vec<Vec<f64>> = perm.iter().map(|&j| basis[j].clone()).collect();
        let cert = ocs_alpha(points, labels, &assigned, theta)?;
        if best.as_ref().is_none_or(|b| cert.alpha < b.alpha) {
            best = Some(cert);
        }
    }
    Ok(best.expect("at least one pairing"))
}

/// Rows of the orthogonal polar factor `U Vᵀ` of `m = U Σ Vᵀ`.
fn polar_rows(m: &Matrix) -> Result<Vec<Vec<f64>>> {
    let k = m.rows();
    let gram = m.transpose_matmul(m);
    let e = sym_eigen(&gram, None)?;
    let smax = e.values[0].max(0.0).sqrt();
    let smin = e.values[k - 1].max(0.0).sqrt();
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::DegenerateMeans { k });
    }
    // (MᵀM)^{-1/2} = V Σ^{-1} Vᵀ
    let inv_root = Matrix::from_fn(k, k, |i, j| {
        (0..k)
            .map(|l| e.vectors[(i, l)] * e.vectors[(j, l)] / e.values[l].sqrt())
            .sum()
    });
    let p = m.matmul(&inv_root);
    Ok((0..k).map(|i| p.row(i).to_vec()).collect())
}

/// Monte Carlo fraction of diverse `K`-tuples (one point per class, drawn
/// uniformly) whose pairwise angles all lie within `θ/2` of a right angle.
pub fn theta_orthogonal_fraction(
    points: &[Vec<f64>],
    labels: &[usize],
    theta: f64,
    n_tuples: usize,
    rng: &mut Rng,
) -> Result<f64> {
    check_lengths(points, labels)?;
    let k = points.first().map_or(0, Vec::len);
    let cls = classes(labels, k)?;
    if n_tuples == 0 {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    let mut tuple = vec![0usize; k];
    for _ in 0..n_tuples {
        for (slot, idx) in tuple.iter_mut().zip(&cls) {
            *slot = idx[rng.index(idx.len())];
        }
        let ok = (0..k).tuple_combinations().all(|(a, b)| {
            angle_between(&points[tuple[a]], &points[tuple[b]]).is_ok_and(|ang| (ang - FRAC_PI_2).abs() <= 0.5 * theta)
        });
        if ok {
            hits += 1;
        }
    }
    Ok(hits as f64 / n_tuples as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansState {
    /// Current means, stored as averages (not renormalized).
    pub means: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub iteration: usize,
}

/// Points scaled to unit norm; zero vectors are dropped and their indices
/// returned separately.
pub fn normalize_points(points: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>, Vec<usize>) {
    let mut kept = Vec::new();
    let mut kept_idx = Vec::new();
    let mut dropped = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let n = norm2(p);
        if n > 0.0 {
            kept.push(p.iter().map(|v| v / n).collect());
            kept_idx.push(i);
        } else {
            dropped.push(i);
        }
    }
    (kept, kept_idx, dropped)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest mean; ties go to the lowest index.
fn nearest(means: &[Vec<f64>], y: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (l, a) in means.iter().enumerate() {
        let d = squared_distance(a, y);
        if d < best_d {
            best_d = d;
            best = l;
        }
    }
    best
}

/// One assignment step followed by one mean step. A mean whose cluster is
/// empty keeps its previous value.
pub fn kmeans_update(state: &KMeansState, y: &[Vec<f64>]) -> KMeansState {
    let k = state.means.len();
    let dim = state.means.first().map_or(0, Vec::len);
    let assignments: Vec<usize> = y.iter().map(|yi| nearest(&state.means, yi)).collect();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (yi, &a) in y.iter().zip(&assignments) {
        counts[a] += 1;
        sums[a].iter_mut().zip(yi).for_each(|(s, v)| *s += v);
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .zip(&state.means)
        .map(|((s, &c), old)| {
            if c == 0 {
                old.clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect();
    KMeansState {
        means,
        assignments,
        iteration: state.iteration + 1,
    }
}

/// `Σ_i ‖a_{z_i} − y_i‖²`.
pub fn within_cluster_ss(means: &[Vec<f64>], assignments: &[usize], y: &[Vec<f64>]) -> f64 {
    y.iter().zip(assignments).map(|(yi, &a)| squared_distance(&means[a], yi)).sum()
}

/// `K` orthonormal vectors in `ℝ^K`: Gram–Schmidt of a Gaussian matrix,
/// which fixes the signs so that the triangular factor has a positive
/// diagonal.
pub fn random_orthonormal(k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    loop {
        let mut g = Matrix::from_fn(k, k, |_, _| rng.gaussian());
        let norms = orthonormalize_columns(&mut g);
        if norms.iter().all(|&n| n > 1e-8) {
            return (0..k).map(|j| g.column(j)).collect();
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansRun {
    /// Cluster of every kept point, aligned with `kept`.
    pub assignments: Vec<usize>,
    /// Indices of the input points that were clustered.
    pub kept: Vec<usize>,
    /// Indices of zero vectors that were dropped.
    pub dropped: Vec<usize>,
    pub n_iterations: usize,
    pub initialization: Vec<Vec<f64>>,
    pub means: Vec<Vec<f64>>,
}

/// Spherical K-means from a uniformly random orthonormal initialization,
/// iterated until the assignments stop changing or `max_iter` updates.
pub fn kmeans_run(points: &[Vec<f64>], k: usize, rng: &mut Rng, max_iter: usize) -> KMeansRun {
    let init = random_orthonormal(k, rng);
    kmeans_from(points, init, max_iter)
}

pub fn kmeans_from(points: &[Vec<f64>], init: Vec<Vec<f64>>, max_iter: usize) -> KMeansRun {
    let (y, kept, dropped) = normalize_points(points);
    let mut state = KMeansState {
        means: init.clone(),
        assignments: Vec::new(),
        iteration: 0,
    };
    while state.iteration < max_iter {
        let next = kmeans_update(&state, &y);
        let settled = next.assignments == state.assignments;
        state = next;
        if settled {
            break;
        }
    }
    KMeansRun {
        assignments: state.assignments,
        kept,
        dropped,
        n_iterations: state.iteration,
        initialization: init,
        means: state.means,
    }
}

/// Smallest fraction of disagreements between `assignments` and `labels`
/// over relabelings of the assignment alphabet: exhaustive up to
/// [`EXHAUSTIVE_MATCH_LIMIT`] clusters, greedy on the confusion matrix
/// beyond.
pub fn misclustering(assignments: &[usize], labels: &[usize]) -> Result<f64> {
    if assignments.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: assignments.len(),
            right: labels.len(),
        });
    }
    let n = assignments.len();
    if n == 0 {
        return Ok(0.0);
    }
    let k = assignments.iter().chain(labels).copied().max().unwrap_or(0) + 1;
    let mut confusion = vec![vec![0usize; k]; k];
    for (&a, &z) in assignments.iter().zip(labels) {
        confusion[a][z] += 1;
    }
    let matched = if k <= EXHAUSTIVE_MATCH_LIMIT {
        (0..k)
            .permutations(k)
            .map(|perm| (0..k).map(|a| confusion[a][perm[a]]).sum::<usize>())
            .max()
            .unwrap_or(0)
    } else {
        greedy_match(confusion)
    };
    Ok(1.0 - matched as f64 / n as f64)
}

fn greedy_match(mut confusion: Vec<Vec<usize>>) -> usize {
    let k = confusion.len();
    let mut total = 0;
    for _ in 0..k {
        let (mut ba, mut bz, mut bv) = (0, 0, 0);
        for (a, row) in confusion.iter().enumerate() {
            for (z, &v) in row.iter().enumerate() {
                if v > bv {
                    (ba, bz, bv) = (a, z, v);
                }
            }
        }
        if bv == 0 {
            break;
        }
        total += bv;
        confusion[ba].iter_mut().for_each(|v| *v = 0);
        confusion.iter_mut().for_each(|row| row[bz] = 0);
    }
    total
}

/// Whether `(α, θ)` are small enough for a single K-means update to recover
/// every cluster up to `αn` points:
/// `[αn + (1−α)|Z_m| sin θ]/[(1−α)|Z_m|] ≤ sin(π/8)` and
/// `[(1−α)|Z_m| cos θ − αn]/[|Z_m| + αn] ≥ ½` for every cluster.
pub fn proposition1_condition(alpha: f64, theta: f64, cluster_sizes: &[usize], n: usize) -> bool {
    let n = n as f64;
    cluster_sizes.iter().all(|&z| {
        let z = z as f64;
        let core = (1.0 - alpha) * z;
        let first = (alpha * n + core * theta.sin()) / core;
        let second = (core * theta.cos() - alpha * n) / (z + alpha * n);
        core > 0.0 && first <= FRAC_PI_8.sin() && second >= 0.5
    })
}
