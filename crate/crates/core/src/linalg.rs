//! Small dense linear-algebra helpers shared by the subspace, baseline and
//! theory modules.

use log::warn;
use nalgebra::{DMatrix, DVector};

/// Symmetric eigendecomposition with eigenvalues sorted non-increasing.
///
/// Each eigenvector is sign-normalized so that its largest-magnitude entry
/// is positive (first such entry on exact ties), which makes the output a
/// deterministic function of the input matrix.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// In-place Gram-Schmidt with one full re-orthogonalization pass (CGS2).
///
/// A column that collapses numerically is replaced by the standard basis
/// vector least aligned with the columns before it.
pub fn orthonormalize(basis: &mut DMatrix<f64>) {
    let (p, k) = basis.shape();
    let data = basis.as_mut_slice();
    for j in 0..k {
        let (done, rest) = data.split_at_mut(j * p);
        let col = &mut rest[..p];
        let original = dot(col, col).sqrt();
        for _pass in 0..2 {
            for i in 0..j {
                let q = &done[i * p..(i + 1) * p];
                let c = dot(q, col);
                axpy(-c, q, col);
            }
        }
        let norm = dot(col, col).sqrt();
        if norm <= 1e-10 * original.max(1e-300) || norm < 1e-150 {
            warn!("orthonormalization: column {j} collapsed, substituting a jittered basis vector");
            replace_degenerate(done, col, p, j);
        } else {
            col.iter_mut().for_each(|x| *x /= norm);
        }
    }
}

fn replace_degenerate(done: &[f64], col: &mut [f64], p: usize, j: usize) {
    // pick the coordinate axis with the smallest mass in the existing span
    let mut best = 0;
    let mut best_mass = f64::INFINITY;
    for axis in 0..p {
        let mass: f64 = (0..j).map(|i| done[i * p + axis].powi(2)).sum();
        if mass < best_mass {
            best_mass = mass;
            best = axis;
        }
    }
    col.iter_mut().for_each(|x| *x = 0.0);
    col[best] = 1.0;
    for _pass in 0..2 {
        for i in 0..j {
            let q = &done[i * p..(i + 1) * p];
            let c = dot(q, col);
            axpy(-c, q, col);
        }
    }
    let norm = dot(col, col).sqrt();
    col.iter_mut().for_each(|x| *x /= norm);
}

/// Orthonormal basis for the column span of `m`, dropping numerically null
/// directions. Returns a p x r matrix with r = numerical rank.
pub fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, k) = m.shape();
    if p == 0 || k == 0 {
        return DMatrix::zeros(p, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let tol = smax * (p.max(k) as f64) * f64::EPSILON;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    DMatrix::from_fn(p, keep.len(), |r, c| u[(r, keep[c])])
}

/// Singular values of a (small) matrix in non-increasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator (spectral) norm of a symmetric matrix.
pub fn symmetric_op_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Orthogonal projector `Q Qᵀ` onto the span of an orthonormal basis.
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

pub(crate) fn column_mean(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.ncols().max(1) as f64;
    x.column_sum() / n
}
