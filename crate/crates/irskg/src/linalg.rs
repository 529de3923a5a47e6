//! Small complex-matrix helpers shared across the crate.
//!
//! Everything here operates on Hermitian matrices. Determinants are always
//! evaluated in log-space through the eigenvalues, because the covariance
//! blocks this crate manipulates have entries around 1e-10 and direct
//! determinant products of 24x24 matrices would underflow `f64`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::LinalgError;

/// Force exact Hermitian symmetry: (A + A^H) / 2.
pub fn hermitize(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let herm = (a + a.adjoint()).scale(0.5);
    herm
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Vec<f64> {
    let mut vals: Vec<f64> = a
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    vals
}

/// Natural-log determinant of a Hermitian positive-definite matrix.
///
/// Returns an error when any eigenvalue is nonpositive, which for the
/// covariance stacks built here can only happen with zero noise power.
pub fn ln_det_hpd(a: &DMatrix<Complex64>) -> Result<f64, LinalgError> {
    let vals = hermitian_eigenvalues(a);
    let mut acc = 0.0;
    for &v in &vals {
        if v <= 0.0 {
            return Err(LinalgError::SingularMatrix { eigenvalue: v });
        }
        acc += v.ln();
    }
    Ok(acc)
}

/// Project a Hermitian matrix onto the PSD cone by clipping negative
/// eigenvalues at zero.
pub fn psd_clip(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = a.clone().symmetric_eigen();
    let n = a.nrows();
    let mut clipped = DMatrix::<Complex64>::zeros(n, n);
    for (idx, &val) in eig.eigenvalues.iter().enumerate() {
        if val > 0.0 {
            let col = eig.eigenvectors.column(idx);
            // clipped += val * col col^H
            for r in 0..n {
                for c in 0..n {
                    clipped[(r, c)] += col[r] * col[c].conj() * Complex64::new(val, 0.0);
                }
            }
        }
    }
    clipped
}

/// Largest eigenvalue and its eigenvector of a Hermitian matrix.
pub fn principal_eigenpair(a: &DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let eig = a.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into())
}

/// Frobenius norm.
pub fn frob_norm(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// || a - b ||_F / || b ||_F.
pub fn rel_frob_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    frob_norm(&(a - b)) / frob_norm(b)
}

/// All entries of `v` have unit modulus within `tol`.
pub fn is_unit_modulus(v: &DVector<Complex64>, tol: f64) -> bool {
    v.iter().all(|z| (z.norm() - 1.0).abs() <= tol)
}

/// Relative difference with an absolute floor of 1, for comparing
/// quantities (rates in bits) that may legitimately sit near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
