//! Small dense linear-algebra helpers used by the posterior computations.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Force exact symmetry after a sequence of matrix products.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Minimum eigenvalue of a symmetric matrix.
pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Cholesky-backed solver for symmetric positive-definite systems.
///
/// Factorization is attempted on the matrix as given; `with_jitter_fallback`
/// retries once with a small diagonal shift before giving up, which keeps
/// solves exact whenever the matrix is comfortably positive definite.
pub(crate) struct SpdSolver {
    chol: Cholesky<f64, Dyn>,
}

impl SpdSolver {
    /// Factorize without any fallback; the error carries the minimum
    /// eigenvalue so callers can report how indefinite the matrix was.
    pub fn strict(m: &DMatrix<f64>) -> Result<Self> {
        match m.clone().cholesky() {
            Some(chol) => Ok(SpdSolver { chol }),
            None => Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_symmetric_eigenvalue(m),
            }),
        }
    }

    /// Factorize, retrying once with `jitter` added to the diagonal.
    pub fn with_jitter_fallback(m: &DMatrix<f64>, jitter: f64) -> Result<Self> {
        if let Some(chol) = m.clone().cholesky() {
            return Ok(SpdSolver { chol });
        }
        let n = m.nrows();
        let jittered = m + DMatrix::<f64>::identity(n, n) * jitter;
        match jittered.clone().cholesky() {
            Some(chol) => Ok(SpdSolver { chol }),
            None => Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_symmetric_eigenvalue(&jittered),
            }),
        }
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let mut inv = self.chol.inverse();
        symmetrize(&mut inv);
        inv
    }
}

/// True when a symmetric matrix admits a Cholesky factorization.
pub(crate) fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}
