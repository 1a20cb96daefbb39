//! Thin helpers over `faer` for the handful of dense operations the crate needs.

use faer::{ColRef, Mat, MatRef, Side};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("eigendecomposition failed to converge")]
    EigenFailed,
    #[error("singular value decomposition failed to converge")]
    SvdFailed,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Eigenvalues in nondecreasing order and the matching orthonormal eigenvectors (columns).
pub fn sym_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if !is_finite(a) {
        return Err(LinalgError::NonFinite);
    }
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| LinalgError::EigenFailed)?;
    let s = evd.S().column_vector();
    let values = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Thin SVD `X = U diag(s) Vᵀ`, singular values nonincreasing.
pub fn thin_svd(x: MatRef<'_, f64>) -> Result<(Mat<f64>, Vec<f64>, Mat<f64>), LinalgError> {
    if !is_finite(x) {
        return Err(LinalgError::NonFinite);
    }
    let svd = x.thin_svd().map_err(|_| LinalgError::SvdFailed)?;
    let s = svd.S().column_vector();
    let k = x.nrows().min(x.ncols());
    let values = (0..k).map(|i| s[i]).collect();
    Ok((svd.U().to_owned(), values, svd.V().to_owned()))
}

pub fn max_asymmetry(a: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn is_finite(a: MatRef<'_, f64>) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].is_finite()))
}

/// `a · x`.
pub fn mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len(), "mat_vec dimension mismatch");
    let y = a * ColRef::from_slice(x);
    (0..a.nrows()).map(|i| y[i]).collect()
}

/// `aᵀ · x`.
pub fn mat_t_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.nrows(), x.len(), "mat_t_vec dimension mismatch");
    let y = a.transpose() * ColRef::from_slice(x);
    (0..a.ncols()).map(|i| y[i]).collect()
}

/// `xᵀ a x`.
pub fn quad_form(a: MatRef<'_, f64>, x: &[f64]) -> f64 {
    dot(&mat_vec(a, x), x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `V diag(d) Vᵀ`.
pub fn reconstruct(v: MatRef<'_, f64>, d: &[f64]) -> Mat<f64> {
    assert_eq!(v.ncols(), d.len());
    let scaled = Mat::<f64>::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * d[j]);
    &scaled * v.transpose()
}

pub fn max_abs_diff(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_two_by_two() {
        let a = Mat::<f64>::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.5 });
        let (vals, vecs) = sym_eigen(a.as_ref()).unwrap();
        assert!((vals[0] - 0.5).abs() < 1e-14);
        assert!((vals[1] - 1.5).abs() < 1e-14);
        let back = reconstruct(vecs.as_ref(), &vals);
        assert!(max_abs_diff(back.as_ref(), a.as_ref()) < 1e-14);
    }

    #[test]
    fn svd_reconstructs() {
        let x = Mat::<f64>::from_fn(3, 5, |i, j| ((i * 5 + j) as f64).sin());
        let (u, s, v) = thin_svd(x.as_ref()).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s[0] >= s[1] && s[1] >= s[2]);
        let us = Mat::<f64>::from_fn(3, 3, |i, j| u[(i, j)] * s[j]);
        let back = &us * v.transpose();
        assert!(max_abs_diff(back.as_ref(), x.as_ref()) < 1e-13);
    }

    #[test]
    fn products() {
        let a = Mat::<f64>::from_fn(2, 3, |i, j| (i + 2 * j) as f64);
        assert_eq!(mat_vec(a.as_ref(), &[1.0, 1.0, 1.0]), vec![6.0, 9.0]);
        assert_eq!(mat_t_vec(a.as_ref(), &[1.0, 1.0]), vec![1.0, 5.0, 9.0]);
        let id = Mat::<f64>::identity(3, 3);
        assert_eq!(quad_form(id.as_ref(), &[1.0, 2.0, 2.0]), 9.0);
    }

    #[test]
    fn rejects_non_square_and_nan() {
        let a = Mat::<f64>::zeros(2, 3);
        assert!(matches!(sym_eigen(a.as_ref()), Err(LinalgError::NotSquare { .. })));
        let mut b = Mat::<f64>::zeros(2, 2);
        b[(0, 1)] = f64::NAN;
        assert!(matches!(sym_eigen(b.as_ref()), Err(LinalgError::NonFinite)));
    }
}
