//! Factorization helpers shared by conditioning and sampling.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Relative diagonal jitter ladder: 1e-12, 1e-11, ..., 1e-6 times the mean
/// diagonal entry.
pub const JITTER_LADDER: [f64; 7] = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Cholesky factorization of `m + jitter·I`, climbing the ladder until the
/// factorization succeeds. Returns the factor together with the absolute
/// jitter that was applied.
pub fn jittered_cholesky(m: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = m.nrows();
    let scale = if n == 0 {
        1.0
    } else {
        let mean_diag = m.diagonal().iter().map(|v| v.abs()).sum::<f64>() / n as f64;
        if mean_diag > 0.0 {
            mean_diag
        } else {
            1.0
        }
    };
    for rel in JITTER_LADDER {
        let jitter = rel * scale;
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(shifted) {
            return Ok((chol, jitter));
        }
    }
    Err(Error::Factorization {
        dim: n,
        max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * scale,
    })
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
