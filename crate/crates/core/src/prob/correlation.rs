use nalgebra::{DMatrix, SymmetricEigen};

use super::linalg::is_symmetric;
use crate::error::{Error, Result};

/// Eigenvalues at or above this are treated as nonnegative; such inputs are
/// returned unchanged.
const PSD_ACCEPT_TOL: f64 = 1e-12;

/// Projects a symmetric unit-diagonal matrix onto the correlation matrices.
///
/// Negative eigenvalues are clipped to zero, the matrix is rebuilt, and the
/// unit diagonal is restored by the congruence `D^{-1/2} A D^{-1/2}`.
pub fn project_to_correlation(raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !is_symmetric(raw, 1e-12) {
        return Err(Error::invalid(
            "correlation",
            "matrix must be square and symmetric",
        ));
    }
    if let Some(i) = (0..raw.nrows()).find(|&i| (raw[(i, i)] - 1.0).abs() > 1e-12) {
        return Err(Error::invalid(
            "correlation",
            format!("diagonal entry {i} is {} (expected 1)", raw[(i, i)]),
        ));
    }
    let n = raw.nrows();
    let eig = SymmetricEigen::new(raw.clone());
    if eig.eigenvalues.iter().all(|&v| v >= -PSD_ACCEPT_TOL) {
        return Ok(raw.clone());
    }

    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let q = &eig.eigenvectors;
    let mut a = q * DMatrix::from_diagonal(&clipped) * q.transpose();

    // Clipping only raises eigenvalues, so every diagonal entry is now >= 1.
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / a[(i, i)].sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
        a[(i, i)] = 1.0;
    }
    Ok(a)
}
