//! Small dense linear-algebra helpers shared by the spectral modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values strictly above `threshold`.
pub fn count_above(sv: &[f64], threshold: f64) -> usize {
    sv.iter().filter(|&&s| s > threshold).count()
}

/// Rank with a threshold relative to the largest singular value.
pub fn relative_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&top) if top > 0.0 => count_above(&sv, rel_tol * top),
        _ => 0,
    }
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending
/// and eigenvector columns permuted to match.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Orthonormal basis (as columns) of the span of the columns of `g`,
/// dropping directions whose singular value is below `rel_tol` times the largest.
pub fn orthonormal_span(g: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let m = g.nrows();
    if g.ncols() == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = g.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > 0.0 && svd.singular_values[k] > rel_tol * top)
        .collect();
    let mut out = DMatrix::zeros(m, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(k));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `q` inside R^m.
pub fn orthogonal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let m = q.nrows();
    let proj = DMatrix::<f64>::identity(m, m) - q * q.transpose();
    let (values, vectors) = sym_eigen_sorted(&proj);
    let keep: Vec<usize> = (0..m).filter(|&k| values[k] > 0.5).collect();
    let mut out = DMatrix::zeros(m, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        out.set_column(dst, &vectors.column(k));
    }
    out
}

/// Remove from `v` its components along the orthonormal columns of `q`.
pub fn project_out(v: &DVector<f64>, q: &DMatrix<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    v - q * (q.transpose() * v)
}

/// Solve `a x = b` through the SVD pseudo-inverse, ignoring singular values
/// below `rel_tol` times the largest.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0_f64, |acc, &s| acc.max(s));
    let eps = rel_tol * top;
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}
