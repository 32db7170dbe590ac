//! Predictive distributions at arbitrary points and per-point validation
//! log-likelihoods with the clipping bounds used for private averaging.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::inference::{NoiseModel, VariationalPosterior};
use crate::kernels::{gram_matrices, InducingSet, KernelSpec};
use crate::linalg::{self, SpdSolver};
use crate::stats::{normal_logpdf, LN_2PI};

/// Variance floor: values in `[-NEGATIVE_VARIANCE_TOLERANCE, 0)` are rounded
/// up to zero, anything lower is an error.
const NEGATIVE_VARIANCE_TOLERANCE: f64 = 1e-10;

/// Covariance of a predictive distribution, full or diagonal-only.
#[derive(Debug, Clone)]
pub enum PredictiveCovariance {
    Full(DMatrix<f64>),
    DiagonalOnly(DVector<f64>),
}

/// Gaussian predictive distribution over latent function values at a set of
/// query points; observation noise is not included.
#[derive(Debug, Clone)]
pub struct PredictiveDistribution {
    pub mean: DVector<f64>,
    covariance: PredictiveCovariance,
}

impl PredictiveDistribution {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.len() == 0
    }

    pub fn is_diag_only(&self) -> bool {
        matches!(self.covariance, PredictiveCovariance::DiagonalOnly(_))
    }

    /// Per-point latent variances.
    pub fn variances(&self) -> DVector<f64> {
        match &self.covariance {
            PredictiveCovariance::Full(m) => m.diagonal(),
            PredictiveCovariance::DiagonalOnly(v) => v.clone(),
        }
    }

    pub fn full_covariance(&self) -> Option<&DMatrix<f64>> {
        match &self.covariance {
            PredictiveCovariance::Full(m) => Some(m),
            PredictiveCovariance::DiagonalOnly(_) => None,
        }
    }
}

fn floor_variance(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -NEGATIVE_VARIANCE_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::invalid(format!(
            "predictive variance {v} is negative beyond round-off"
        )))
    }
}

/// Predictive distribution of the posterior at `points`:
/// mean `K_vz K_zz^-1 m` and covariance
/// `K_vv - K_vz K_zz^-1 (K_zz - S) K_zz^-1 K_zv`.
///
/// With `diag_only` set, only per-point variances are formed.
pub fn predict(
    post: &VariationalPosterior,
    spec: &KernelSpec,
    z: &InducingSet,
    points: &[Vec<f64>],
    diag_only: bool,
) -> Result<PredictiveDistribution> {
    if post.dim() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: post.dim(),
        });
    }
    let km = gram_matrices(spec, z, points)?;
    let solver = SpdSolver::with_jitter_fallback(&km.k_zz, spec.jitter())?;

    // t = K_zz^-1 K_zv, one column per query point.
    let t = solver.solve_mat(&km.k_zx);
    let mean = km.k_zx.transpose() * solver.solve_vec(post.mean());

    let covariance = if diag_only {
        let s = post.covariance();
        let mut vars = DVector::<f64>::zeros(points.len());
        for (i, point) in points.iter().enumerate() {
            let t_i = t.column(i);
            let k_i = km.k_zx.column(i);
            let prior = spec.eval(point, point)?;
            let raw = prior - k_i.dot(&t_i) + (s * t_i).dot(&t_i);
            vars[i] = floor_variance(raw)?;
        }
        PredictiveCovariance::DiagonalOnly(vars)
    } else {
        let n = points.len();
        let mut k_vv = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            k_vv[(i, i)] = spec.variance();
            for j in (i + 1)..n {
                let v = spec.eval(&points[i], &points[j])?;
                k_vv[(i, j)] = v;
                k_vv[(j, i)] = v;
            }
        }
        let cross = km.k_zx.transpose() * &t; // K_vz K_zz^-1 K_zv
        let s_term = t.transpose() * post.covariance() * &t;
        let mut cov = k_vv - cross + s_term;
        linalg::symmetrize(&mut cov);
        for i in 0..n {
            cov[(i, i)] = floor_variance(cov[(i, i)])?;
        }
        PredictiveCovariance::Full(cov)
    };

    Ok(PredictiveDistribution { mean, covariance })
}

/// Per-point log-likelihoods of validation outputs under the predictive
/// distribution with observation noise added to the latent variances.
pub fn validation_loglik_terms(
    pred: &PredictiveDistribution,
    y: &[f64],
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    if y.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            got: y.len(),
        });
    }
    let vars = pred.variances();
    y.iter()
        .enumerate()
        .map(|(i, &yi)| {
            let total_var = vars[i] + noise.variance();
            if total_var <= 0.0 {
                return Err(Error::invalid(format!(
                    "non-positive predictive variance {total_var} at point {i}"
                )));
            }
            Ok(normal_logpdf(yi, pred.mean[i], total_var))
        })
        .collect()
}

/// Log-likelihood terms clipped into the fixed interval used for private
/// averaging.
#[derive(Debug, Clone)]
pub struct ClippedLogLik {
    pub terms: Vec<f64>,
    /// Interval center: `-ln(2 pi)/2 - ln(sd) - R_y^2 / sd^2`.
    pub center: f64,
    /// Interval radius: `R_y^2 / sd^2`.
    pub radius: f64,
}

impl ClippedLogLik {
    pub fn upper(&self) -> f64 {
        self.center + self.radius
    }

    pub fn lower(&self) -> f64 {
        self.center - self.radius
    }
}

/// Clip per-point log-likelihood terms to the a-priori attainable interval
/// derived from the output bound and the observation noise.
pub fn clip_loglik(terms: &[f64], output_bound: f64, noise: &NoiseModel) -> ClippedLogLik {
    let radius = output_bound * output_bound / noise.variance();
    let center = -0.5 * LN_2PI - noise.sd().ln() - radius;
    let lo = center - radius;
    let hi = center + radius;
    let clipped = terms.iter().map(|t| t.clamp(lo, hi)).collect();
    ClippedLogLik {
        terms: clipped,
        center,
        radius,
    }
}
