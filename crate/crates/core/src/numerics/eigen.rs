//! Dense symmetric eigensolvers.
//!
//! Two algorithms are provided:
//!
//! * cyclic Jacobi rotations, used for small matrices and as an independent
//!   cross-check in tests;
//! * Householder tridiagonalization followed by implicit QL with Wilkinson
//!   shifts, used for the operator and Laplacian matrices (hundreds to a few
//!   thousand rows). When only a few leading eigenvectors are requested they
//!   are recovered by inverse iteration on the tridiagonal form and
//!   back-transformed through the stored reflectors, which avoids forming the
//!   full orthogonal factor.
//!
//! All outputs are sorted by descending eigenvalue and every eigenvector is
//! sign-normalized so that its entry of largest magnitude is nonnegative.

use super::matrix::{dot, Matrix};
use crate::error::Error;

/// Relative symmetry tolerance accepted by [`sym_eigen`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Matrices up to this order go through Jacobi under [`EigenMethod::Auto`].
const JACOBI_AUTO_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Auto,
    Jacobi,
    Tridiagonal,
}

/// Eigenpairs of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// `n × k` matrix whose columns are the matching orthonormal eigenvectors.
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }

    /// `‖M − V Λ Vᵀ‖_F` for the pairs held here.
    pub fn reconstruction_error(&self, m: &Matrix) -> f64 {
        let n = m.rows();
        let k = self.values.len();
        let mut worst = 0.0;
        for i in 0..n {
            let vi = self.vectors.row(i);
            for j in 0..n {
                let vj = self.vectors.row(j);
                let mut s = 0.0;
                for l in 0..k {
                    s += vi[l] * self.values[l] * vj[l];
                }
                let d = m[(i, j)] - s;
                worst += d * d;
            }
        }
        worst.sqrt()
    }

    /// `‖VᵀV − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let g = self.vectors.transpose_matmul(&self.vectors);
        g.sub(&Matrix::identity(g.rows())).frobenius_norm()
    }
}

fn check_symmetric(m: &Matrix) -> Result<(), Error> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NonSymmetric {
            asymmetry: asym,
            scale,
        });
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric matrix. With `top_k = Some(k)` only the
/// `k` leading pairs are returned.
pub fn sym_eigen(m: &Matrix, top_k: Option<usize>) -> Result<SymEigen, Error> {
    sym_eigen_with(m, top_k, EigenMethod::Auto)
}

pub fn sym_eigen_with(
    m: &Matrix,
    top_k: Option<usize>,
    method: EigenMethod,
) -> Result<SymEigen, Error> {
    check_symmetric(m)?;
    let n = m.rows();
    let k = top_k.unwrap_or(n).min(n);
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let method = match method {
        EigenMethod::Auto if n <= JACOBI_AUTO_LIMIT => EigenMethod::Jacobi,
        EigenMethod::Auto => EigenMethod::Tridiagonal,
        other => other,
    };
    let (values, vectors) = match method {
        EigenMethod::Jacobi => jacobi(m)?,
        _ if k * 8 <= n => {
            let t = Tridiagonal::reduce(m);
            let values = t.eigenvalues()?;
            let vectors = t.leading_eigenvectors(&values, k);
            (values[..k].to_vec(), vectors)
        }
        _ => householder_ql(m)?,
    };
    Ok(finish(values, vectors, k))
}

/// Eigenvalues only, descending.
pub fn sym_eigenvalues(m: &Matrix) -> Result<Vec<f64>, Error> {
    check_symmetric(m)?;
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    Tridiagonal::reduce(m).eigenvalues()
}

/// Sorts pairs descending (stable, so equal eigenvalues keep solver order),
/// truncates to `k` and fixes signs. `vectors` holds eigenvectors as rows.
fn finish(values: Vec<f64>, vectors: Vec<Vec<f64>>, k: usize) -> SymEigen {
    let n = vectors.first().map_or(0, Vec::len);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order.truncate(k);
    let mut out = Matrix::zeros(n, order.len());
    let mut vals = Vec::with_capacity(order.len());
    for (col, &idx) in order.iter().enumerate() {
        let mut v = vectors[idx].clone();
        fix_sign(&mut v);
        out.set_column(col, &v);
        vals.push(values[idx]);
    }
    SymEigen {
        values: vals,
        vectors: out,
    }
}

/// Flips `v` so that its first entry of largest magnitude is nonnegative.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi. Returns eigenvalues (unsorted) and eigenvectors as rows.
fn jacobi(m: &Matrix) -> Result<(Vec<f64>, Vec<Vec<f64>>), Error> {
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize exactly so both triangles evolve identically
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    // rows of `v` are eigenvectors
    let mut v = Matrix::identity(n);
    let fro = a.frobenius_norm();
    let target = (f64::EPSILON * fro).powi(2) * 0.25;
    let max_sweeps = 100 * n.max(1);

    for _sweep in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off <= target || off == 0.0 {
            let values = (0..n).map(|i| a[(i, i)]).collect();
            let vectors = (0..n).map(|i| v.row(i).to_vec()).collect();
            return Ok((values, vectors));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[(r, p)];
                    let h = a[(r, q)];
                    let new_rp = g - s * (h + g * tau);
                    let new_rq = h + s * (g - h * tau);
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                let (vp, vq) = two_rows_mut(&mut v, p, q);
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let g = *x;
                    let h = *y;
                    *x = g - s * (h + g * tau);
                    *y = h + s * (g - h * tau);
                }
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: max_sweeps,
    })
}

fn two_rows_mut(m: &mut Matrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(q * cols);
    (&mut head[p * cols..(p + 1) * cols], &mut tail[..cols])
}

/// Householder reduction `A = Q T Qᵀ` with `T` tridiagonal. Reflector `i`
/// acts on coordinates `i+1..n` as `I − β vvᵀ`.
struct Tridiagonal {
    n: usize,
    diag: Vec<f64>,
    /// `off[i]` couples `i` and `i+1`.
    off: Vec<f64>,
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl Tridiagonal {
    fn reduce(m: &Matrix) -> Self {
        let n = m.rows();
        let mut a = m.clone();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![0.0; n];

        for i in 0..n.saturating_sub(2) {
            let len = n - i - 1;
            // column i below the diagonal, read from row i by symmetry
            let mut v: Vec<f64> = a.row(i)[(i + 1)..].to_vec();
            diag[i] = a[(i, i)];
            // rescale so tiny columns neither underflow nor lose the reflector
            let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if vmax > 0.0 {
                v.iter_mut().for_each(|x| *x /= vmax);
            }
            let xnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if xnorm == 0.0 {
                off[i] = 0.0;
                reflectors.push((vec![0.0; len], 0.0));
                continue;
            }
            let alpha = if v[0] > 0.0 { -xnorm } else { xnorm };
            v[0] -= alpha;
            let alpha = alpha * vmax;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                off[i] = alpha;
                reflectors.push((vec![0.0; len], 0.0));
                continue;
            }
            let beta = 2.0 / vnorm2;
            // p = β B v on the trailing block
            let pb = &mut p[..len];
            for (r, pr) in pb.iter_mut().enumerate() {
                let row = &a.row(i + 1 + r)[(i + 1)..];
                *pr = beta * dot(row, &v);
            }
            let kappa = 0.5 * beta * dot(&v, pb);
            for (pr, vr) in pb.iter_mut().zip(&v) {
                *pr -= kappa * vr;
            }
            // B ← B − v wᵀ − w vᵀ
            for r in 0..len {
                let vr = v[r];
                let wr = pb[r];
                let row = &mut a.row_mut(i + 1 + r)[(i + 1)..];
                for ((x, &vc), &wc) in row.iter_mut().zip(&v).zip(pb.iter()) {
                    *x -= vr * wc + wr * vc;
                }
            }
            off[i] = alpha;
            reflectors.push((v, beta));
        }
        if n >= 2 {
            diag[n - 2] = a[(n - 2, n - 2)];
            off[n - 2] = a[(n - 1, n - 2)];
        }
        if n >= 1 {
            diag[n - 1] = a[(n - 1, n - 1)];
        }
        Self {
            n,
            diag,
            off,
            reflectors,
        }
    }

    fn scale(&self) -> f64 {
        let mut s: f64 = 0.0;
        for i in 0..self.n {
            let e = if i + 1 < self.n { self.off[i].abs() } else { 0.0 };
            let e_prev = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            s = s.max(self.diag[i].abs() + e + e_prev);
        }
        s
    }

    /// Eigenvalues of the tridiagonal form, descending.
    fn eigenvalues(&self) -> Result<Vec<f64>, Error> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        tql(&mut d, &mut e, None)?;
        d.sort_by(|a, b| b.total_cmp(a));
        Ok(d)
    }

    /// Eigenvectors (as rows) of the `k` leading eigenvalues by inverse
    /// iteration, back-transformed to the original coordinates.
    fn leading_eigenvectors(&self, values: &[f64], k: usize) -> Vec<Vec<f64>> {
        let n = self.n;
        let scale = self.scale().max(f64::MIN_POSITIVE);
        let cluster_tol = 1e-3 * scale;
        let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
        for &lambda in values.iter().take(k) {
            // perturb the shift so the factorization is not exactly singular
            let shift = lambda + 4.0 * f64::EPSILON * scale;
            let lu = TridiagonalLu::factor(&self.diag, &self.off, shift, scale);
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 * 0.618_033_988_749_895).fract() - 0.5))
                .collect();
            for _ in 0..4 {
                lu.solve(&mut x);
                for (mu, prev) in &found {
                    if (mu - lambda).abs() <= cluster_tol {
                        let c = dot(prev, &x);
                        x.iter_mut().zip(prev).for_each(|(a, b)| *a -= c * b);
                    }
                }
                let nrm = dot(&x, &x).sqrt();
                if nrm == 0.0 || !nrm.is_finite() {
                    x = vec![0.0; n];
                    x[found.len().min(n - 1)] = 1.0;
                    continue;
                }
                x.iter_mut().for_each(|a| *a /= nrm);
            }
            found.push((lambda, x));
        }
        found
            .into_iter()
            .map(|(_, z)| self.back_transform(z))
            .collect()
    }

    /// `Q z = H_0 H_1 ⋯ H_{n-3} z`.
    fn back_transform(&self, mut z: Vec<f64>) -> Vec<f64> {
        for (i, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut z[(i + 1)..];
            let c = beta * dot(v, tail);
            tail.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
        }
        z
    }

    /// Rows of `Qᵀ`, i.e. `H_{n-3} ⋯ H_0` applied to the identity.
    fn q_transpose(&self) -> Matrix {
        let n = self.n;
        let mut w = Matrix::identity(n);
        for (i, (v, beta)) in self.reflectors.iter().enumerate() {
            if *beta == 0.0 {
                continue;
            }
            // W_sub ← W_sub − β v (vᵀ W_sub), rows i+1..n
            let mut proj = vec![0.0; n];
            for (r, &vr) in v.iter().enumerate() {
                if vr == 0.0 {
                    continue;
                }
                for (p, &x) in proj.iter_mut().zip(w.row(i + 1 + r)) {
                    *p += vr * x;
                }
            }
            for (r, &vr) in v.iter().enumerate() {
                let f = beta * vr;
                if f == 0.0 {
                    continue;
                }
                for (x, &p) in w.row_mut(i + 1 + r).iter_mut().zip(&proj) {
                    *x -= f * p;
                }
            }
        }
        w
    }
}

/// Householder reduction with explicit accumulation followed by QL with
/// rotations applied to the accumulated factor.
fn householder_ql(m: &Matrix) -> Result<(Vec<f64>, Vec<Vec<f64>>), Error> {
    let t = Tridiagonal::reduce(m);
    let mut w = t.q_transpose();
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    e.push(0.0);
    tql(&mut d, &mut e, Some(&mut w))?;
    let n = m.rows();
    let vectors = (0..n).map(|i| w.row(i).to_vec()).collect();
    Ok((d, vectors))
}

/// Implicit QL on a symmetric tridiagonal matrix (`e[i]` couples `i` and
/// `i+1`, `e[n-1]` ignored). When `w` is given its rows are rotated so that
/// row `i` ends up holding the eigenvector of `d[i]`.
fn tql(d: &mut [f64], e: &mut [f64], mut w: Option<&mut Matrix>) -> Result<(), Error> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(1);
    let mut total_iter = 0usize;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                total_iter += 1;
                if total_iter > max_iter {
                    return Err(Error::NoConvergence {
                        iterations: max_iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (wi, wi1) = two_rows_mut(w, i, i + 1);
                        for (a, b) in wi.iter_mut().zip(wi1.iter_mut()) {
                            let hh = *b;
                            *b = s * *a + c * hh;
                            *a = c * *a - s * hh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// LU factorization with partial pivoting of `T − σI` for tridiagonal `T`.
struct TridiagonalLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, scale: f64) -> Self {
        let n = diag.len();
        let tiny = f64::EPSILON * scale;
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        // current row i holds (a at col i, b at col i+1)
        let mut a = diag[0] - shift;
        let mut b = if n > 1 { off[0] } else { 0.0 };
        for i in 0..n.saturating_sub(1) {
            let sub = off[i];
            let d_next = diag[i + 1] - shift;
            let e_next = if i + 2 < n { off[i + 1] } else { 0.0 };
            if a.abs() >= sub.abs() {
                let piv = if a == 0.0 { tiny } else { a };
                let m = sub / piv;
                u0[i] = piv;
                u1[i] = b;
                u2[i] = 0.0;
                mult[i] = m;
                a = d_next - m * b;
                b = e_next;
            } else {
                let m = a / sub;
                u0[i] = sub;
                u1[i] = d_next;
                u2[i] = e_next;
                mult[i] = m;
                swapped[i] = true;
                let new_a = b - m * d_next;
                b = -m * e_next;
                a = new_a;
            }
        }
        u0[n - 1] = if a.abs() < tiny { tiny } else { a };
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.mult[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}
