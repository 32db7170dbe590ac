//! The two data-dependent moment sums of the sparse posterior and their
//! privatization.
//!
//! The quadratic moment is released through its flattened form: diagonal
//! entries first, then upper off-diagonal entries scaled by sqrt(2). Noise is
//! drawn in flattened space and unfolded symmetrically, so off-diagonal
//! entries receive variance `sigma_b^2 / 2` and the privatized matrix stays
//! exactly symmetric.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dp::NoiseScales;
use crate::error::{Error, Result};
use crate::kernels::KernelMatrices;

/// Moment sums `a = sum_i k_i y_i` and `b = sum_i k_i k_i^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentStatistics {
    a: DVector<f64>,
    b: DMatrix<f64>,
}

impl MomentStatistics {
    /// Accumulate the sums from Gram matrices and outputs.
    pub fn compute(km: &KernelMatrices, y: &[f64]) -> Result<Self> {
        let n = km.data_count();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        let d = km.inducing_count();
        let mut a = DVector::<f64>::zeros(d);
        let mut b = DMatrix::<f64>::zeros(d, d);
        for i in 0..n {
            let k_i = km.k_zx.column(i);
            a.axpy(y[i], &k_i, 1.0);
            // Fill the upper triangle once and mirror for exact symmetry.
            for r in 0..d {
                for c in r..d {
                    b[(r, c)] += k_i[r] * k_i[c];
                }
            }
        }
        for r in 0..d {
            for c in (r + 1)..d {
                b[(c, r)] = b[(r, c)];
            }
        }
        Ok(MomentStatistics { a, b })
    }

    /// Wrap externally produced sums; `b` must be exactly symmetric.
    pub fn from_parts(a: DVector<f64>, b: DMatrix<f64>) -> Result<Self> {
        if b.nrows() != b.ncols() || b.nrows() != a.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.nrows(),
            });
        }
        for r in 0..b.nrows() {
            for c in (r + 1)..b.ncols() {
                if b[(r, c)] != b[(c, r)] {
                    return Err(Error::invalid("quadratic moment must be symmetric"));
                }
            }
        }
        Ok(MomentStatistics { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Flattened quadratic moment (diagonal, then sqrt(2)-scaled upper
    /// off-diagonals).
    pub fn flattened_b(&self) -> DVector<f64> {
        flatten_symmetric(&self.b)
    }

    /// Add mechanism noise. Every call draws the same number of normals, so
    /// a fixed seed yields the same perturbation pattern at any scale, and
    /// zero scales return the input bit-for-bit.
    pub fn privatize<R: Rng + ?Sized>(&self, scales: &NoiseScales, rng: &mut R) -> MomentStatistics {
        let d = self.dim();
        let mut a = self.a.clone();
        for i in 0..d {
            let z: f64 = StandardNormal.sample(rng);
            a[i] += scales.sigma_a * z;
        }
        let mut b = self.b.clone();
        let off_scale = scales.sigma_b / 2f64.sqrt();
        for r in 0..d {
            for c in r..d {
                let z: f64 = StandardNormal.sample(rng);
                if r == c {
                    b[(r, c)] += scales.sigma_b * z;
                } else {
                    let noise = off_scale * z;
                    b[(r, c)] += noise;
                    b[(c, r)] += noise;
                }
            }
        }
        MomentStatistics { a, b }
    }
}

/// Flatten a symmetric matrix to length `d (d + 1) / 2`: diagonal first,
/// then upper off-diagonals in row-major order scaled by sqrt(2). The scaling
/// preserves the Euclidean norm of the matrix.
pub fn flatten_symmetric(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    debug_assert_eq!(d, m.ncols());
    let mut out = DVector::<f64>::zeros(d * (d + 1) / 2);
    for i in 0..d {
        out[i] = m[(i, i)];
    }
    let mut idx = d;
    let sqrt2 = 2f64.sqrt();
    for r in 0..d {
        for c in (r + 1)..d {
            out[idx] = sqrt2 * m[(r, c)];
            idx += 1;
        }
    }
    out
}

/// Inverse of [`flatten_symmetric`] up to floating-point rounding of the
/// sqrt(2) rescaling (at most one ulp per off-diagonal entry).
pub fn unflatten_symmetric(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let len = v.len();
    // Solve d (d + 1) / 2 = len.
    let d = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    if d * (d + 1) / 2 != len {
        return Err(Error::invalid(format!(
            "flattened length {len} is not triangular"
        )));
    }
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = v[i];
    }
    let mut idx = d;
    let sqrt2 = 2f64.sqrt();
    for r in 0..d {
        for c in (r + 1)..d {
            let val = v[idx] / sqrt2;
            m[(r, c)] = val;
            m[(c, r)] = val;
            idx += 1;
        }
    }
    Ok(m)
}
