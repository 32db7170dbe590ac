//! Variational posterior over inducing-point function values: the exact
//! closed form, and the noise-aware private variant with regularization and
//! covariance corrections for the mechanism noise.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{
    analytic_gaussian_sigma, MomentStatistics, NoiseScales, PrivacyBudget,
};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrices, InducingSet, KernelMatrices, KernelSpec};
use crate::linalg::{self, SpdSolver};
use crate::sensitivity::{joint_sensitivity, kernel_norm_bound, BoundMethod};

/// Gaussian observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sd: f64,
}

impl NoiseModel {
    pub fn new(sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(Error::invalid(format!(
                "observation noise sd must be positive and finite, got {sd}"
            )));
        }
        Ok(NoiseModel { sd })
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    pub fn precision(&self) -> f64 {
        1.0 / self.variance()
    }
}

/// Gaussian posterior over function values at the inducing inputs.
///
/// `covariance` is the full posterior covariance including the two mechanism
/// noise corrections; the pieces are retained so downstream code can inspect
/// or suppress them.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalPosterior {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    sigma_tilde: DMatrix<f64>,
    lambda: f64,
    correction_linear: DMatrix<f64>,
    correction_quadratic: DMatrix<f64>,
}

impl VariationalPosterior {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Full posterior covariance (base term plus both corrections).
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Inverse of the regularized precision-like matrix, retained for the
    /// correction terms.
    pub fn sigma_tilde(&self) -> &DMatrix<f64> {
        &self.sigma_tilde
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Covariance added for the additive noise on the linear moment.
    pub fn correction_linear(&self) -> &DMatrix<f64> {
        &self.correction_linear
    }

    /// Covariance added for the linearized effect of noise on the quadratic
    /// moment.
    pub fn correction_quadratic(&self) -> &DMatrix<f64> {
        &self.correction_quadratic
    }

    /// The same posterior with both noise corrections removed from the
    /// covariance. Underestimates uncertainty; used as a baseline.
    pub fn without_noise_corrections(&self) -> VariationalPosterior {
        let d = self.dim();
        let mut base = self.covariance.clone();
        base -= &self.correction_linear;
        base -= &self.correction_quadratic;
        linalg::symmetrize(&mut base);
        VariationalPosterior {
            mean: self.mean.clone(),
            covariance: base,
            sigma_tilde: self.sigma_tilde.clone(),
            lambda: self.lambda,
            correction_linear: DMatrix::zeros(d, d),
            correction_quadratic: DMatrix::zeros(d, d),
        }
    }
}

/// Exact variational posterior for known moments:
/// `Sigma = (K_zz + B / noise_var)^-1`, `m = K_zz Sigma a / noise_var`,
/// `S = K_zz Sigma K_zz`.
pub fn exact_posterior(
    km: &KernelMatrices,
    y: &[f64],
    noise: &NoiseModel,
    jitter: f64,
) -> Result<VariationalPosterior> {
    let stats = MomentStatistics::compute(km, y)?;
    posterior_from_moments(km, &stats, &NoiseScales::zero(), noise, 0.0, jitter)
}

/// Regularization strength keeping the perturbed precision-like matrix
/// positive definite with probability about `1 - rho_pd`:
/// `lambda = sigma_b / noise_var * sqrt(d ln(2 d^2 / rho_pd)) * (d+1) / (2d)`.
pub fn regularization_lambda(
    scales: &NoiseScales,
    noise: &NoiseModel,
    d: usize,
    rho_pd: f64,
) -> f64 {
    debug_assert!(d >= 1);
    debug_assert!(rho_pd > 0.0 && rho_pd < 1.0);
    let df = d as f64;
    scales.sigma_b
        * noise.precision()
        * (df * (2.0 * df * df / rho_pd).ln()).sqrt()
        * (df + 1.0)
        / (2.0 * df)
}

/// Noise-aware private posterior from privatized moments.
///
/// The regularized matrix `K_zz + (B + E_b) / noise_var + lambda I` must be
/// positive definite; if it is not, this errors with the minimum eigenvalue
/// rather than inflating lambda, since lambda was fixed ahead of time.
pub fn dp_posterior(
    km: &KernelMatrices,
    private_stats: &MomentStatistics,
    scales: &NoiseScales,
    noise: &NoiseModel,
    rho_pd: f64,
    jitter: f64,
) -> Result<VariationalPosterior> {
    let lambda = regularization_lambda(scales, noise, km.inducing_count(), rho_pd);
    posterior_from_moments(km, private_stats, scales, noise, lambda, jitter)
}

fn posterior_from_moments(
    km: &KernelMatrices,
    stats: &MomentStatistics,
    scales: &NoiseScales,
    noise: &NoiseModel,
    lambda: f64,
    jitter: f64,
) -> Result<VariationalPosterior> {
    let d = km.inducing_count();
    if stats.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: stats.dim(),
        });
    }
    let prec = noise.precision();

    // Regularized precision-like matrix.
    let mut p = km.k_zz.clone();
    p += stats.b() * prec;
    for i in 0..d {
        p[(i, i)] += lambda;
    }
    linalg::symmetrize(&mut p);

    let solver = if lambda > 0.0 || !scales.is_zero() {
        // Private path: positive definiteness is part of the contract.
        SpdSolver::strict(&p).or_else(|_| SpdSolver::with_jitter_fallback(&p, jitter))?
    } else {
        SpdSolver::with_jitter_fallback(&p, jitter)?
    };

    let sigma_tilde = solver.inverse();

    // m = K_zz Sigma a / noise_var
    let v = &sigma_tilde * stats.a();
    let mean = (&km.k_zz * &v) * prec;

    // Base covariance K_zz Sigma K_zz via W = K_zz Sigma.
    let w = &km.k_zz * &sigma_tilde;
    let mut base = &w * &km.k_zz;
    linalg::symmetrize(&mut base);

    // Correction for additive noise on the linear moment:
    // sigma_a^2 / noise_var^2 * K_zz Sigma^2 K_zz = c * W W^T.
    let mut correction_linear = &w * w.transpose() * (scales.sigma_a * scales.sigma_a * prec * prec);
    linalg::symmetrize(&mut correction_linear);

    // Correction for the linearized effect of noise on the quadratic moment.
    // The noise enters as a symmetric matrix (mirrored off-diagonals share
    // one underlying draw of variance sigma_b^2 / 2), and the covariance of
    // the linearized mean under that noise collapses to
    //   sigma_b^2 / (2 noise_var^4) * (||v||^2 W W^T + (W v)(W v)^T)
    // with v = Sigma a and W = K_zz Sigma.
    let wv = &w * &v;
    let mut correction_quadratic = &w * w.transpose() * v.norm_squared();
    correction_quadratic += &wv * wv.transpose();
    correction_quadratic *= 0.5 * scales.sigma_b * scales.sigma_b * prec.powi(4);
    linalg::symmetrize(&mut correction_quadratic);

    let mut covariance = base;
    covariance += &correction_linear;
    covariance += &correction_quadratic;
    linalg::symmetrize(&mut covariance);

    // Nearly singular kernels can leave round-off-scale negative
    // eigenvalues in an otherwise valid covariance; only a genuinely
    // indefinite result is an error.
    if !linalg::is_positive_definite(&covariance) {
        let min_eigenvalue = linalg::min_symmetric_eigenvalue(&covariance);
        if min_eigenvalue < -1e-10 * covariance.amax().max(1.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
    }

    Ok(VariationalPosterior {
        mean,
        covariance,
        sigma_tilde,
        lambda,
        correction_linear,
        correction_quadratic,
    })
}

/// Options for end-to-end private inference.
#[derive(Debug, Clone, Copy)]
pub struct DpGpOptions {
    /// Noise ratio `sigma_a / sigma_b` for the joint mechanism.
    pub noise_ratio: f64,
    /// Failure probability target for the regularization strength.
    pub rho_pd: f64,
    /// Kernel-norm bound selection.
    pub bound_method: BoundMethod,
}

impl Default for DpGpOptions {
    fn default() -> Self {
        DpGpOptions {
            noise_ratio: 1.0,
            rho_pd: 0.01,
            bound_method: BoundMethod::Auto,
        }
    }
}

/// A fitted private posterior along with the calibration quantities used.
#[derive(Debug, Clone)]
pub struct DpGpFit {
    pub posterior: VariationalPosterior,
    pub scales: NoiseScales,
    pub kernel_norm_bound: f64,
    pub sensitivity: f64,
    /// Number of outputs clipped into `[-output_bound, output_bound]`.
    pub clipped_outputs: usize,
}

/// End-to-end private inference: bound the per-point contribution, calibrate
/// the mechanism for the requested budget, privatize the moment sums once,
/// and post-process into the noise-aware posterior. Outputs outside
/// `[-output_bound, output_bound]` are clipped first (with a logged warning)
/// so the sensitivity bound holds unconditionally.
#[allow(clippy::too_many_arguments)]
pub fn dp_gp_inference<R: Rng + ?Sized>(
    inputs: &[Vec<f64>],
    outputs: &[f64],
    z: &InducingSet,
    spec: &KernelSpec,
    noise: &NoiseModel,
    output_bound: f64,
    budget: &PrivacyBudget,
    opts: &DpGpOptions,
    rng: &mut R,
) -> Result<DpGpFit> {
    if inputs.len() != outputs.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: outputs.len(),
        });
    }
    if !(output_bound > 0.0) {
        return Err(Error::invalid("output bound must be positive"));
    }

    let mut clipped_outputs = 0usize;
    let y: Vec<f64> = outputs
        .iter()
        .map(|&v| {
            if v.abs() > output_bound {
                clipped_outputs += 1;
                v.clamp(-output_bound, output_bound)
            } else {
                v
            }
        })
        .collect();
    if clipped_outputs > 0 {
        log::warn!(
            "clipped {clipped_outputs} of {} outputs into [-{output_bound}, {output_bound}]",
            y.len()
        );
    }

    let km = gram_matrices(spec, z, inputs)?;
    let (r_k, _method) = kernel_norm_bound(spec, z, opts.bound_method)?;
    let sensitivity = joint_sensitivity(output_bound, r_k, opts.noise_ratio)?;
    let sigma_a = analytic_gaussian_sigma(budget, sensitivity)?;
    let scales = NoiseScales::from_sigma_a(sigma_a, opts.noise_ratio)?;

    let stats = MomentStatistics::compute(&km, &y)?;
    let private_stats = stats.privatize(&scales, rng);
    let posterior = dp_posterior(&km, &private_stats, &scales, noise, opts.rho_pd, spec.jitter())?;

    Ok(DpGpFit {
        posterior,
        scales,
        kernel_norm_bound: r_k,
        sensitivity,
        clipped_outputs,
    })
}
