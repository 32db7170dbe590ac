//! Iterative private mean estimation under zero-concentrated DP.
//!
//! Starting from a loose interval known to contain the mean, each iteration
//! projects the values into a slightly widened copy of the current interval,
//! releases a noisy clipped mean, and shrinks the interval around it. Most of
//! the budget is reserved for the final release. Under very small budgets the
//! estimate can land outside the initial interval; callers must tolerate
//! that.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Configuration for private mean estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinPressConfig {
    /// Total zCDP budget.
    pub rho: f64,
    /// Center of the interval assumed to contain the mean.
    pub center: f64,
    /// Radius of that interval.
    pub radius: f64,
    /// Number of refinement iterations (default 12).
    pub iterations: usize,
    /// Fraction of the budget spent on the final release (default 3/4).
    pub last_iteration_fraction: f64,
    /// Per-step confidence parameter for the interval updates (default 0.01).
    pub step_beta: f64,
}

impl CoinPressConfig {
    pub fn new(rho: f64, center: f64, radius: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid(format!(
                "zCDP budget must be positive and finite, got {rho}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::invalid("center must be finite"));
        }
        Ok(CoinPressConfig {
            rho,
            center,
            radius,
            iterations: 12,
            last_iteration_fraction: 0.75,
            step_beta: 0.01,
        })
    }

    pub fn with_iterations(mut self, iterations: usize) -> Result<Self> {
        if iterations < 2 {
            return Err(Error::invalid("need at least two iterations"));
        }
        self.iterations = iterations;
        Ok(self)
    }

    pub fn with_last_iteration_fraction(mut self, f: f64) -> Result<Self> {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::invalid("last-iteration fraction must lie in (0,1)"));
        }
        self.last_iteration_fraction = f;
        Ok(self)
    }

    /// Per-iteration budget split; sums exactly to `rho`.
    fn budget_schedule(&self) -> Vec<f64> {
        let t = self.iterations;
        let head = self.rho * (1.0 - self.last_iteration_fraction) / (t - 1) as f64;
        let mut schedule = vec![head; t - 1];
        schedule.push(self.rho - head * (t - 1) as f64);
        schedule
    }
}

/// One-sided tail bound for a unit-variance Gaussian at confidence `beta`.
fn gaussian_tail_bound(beta: f64) -> f64 {
    let l = (1.0 / beta).ln();
    (1.0 + 2.0 * l.sqrt() + 2.0 * l).sqrt()
}

/// Private estimate of the mean of `values` under the config's zCDP budget.
///
/// The caller is expected to have clipped the values into
/// `[center - radius, center + radius]` already.
pub fn coinpress_mean<R: Rng + ?Sized>(
    values: &[f64],
    cfg: &CoinPressConfig,
    rng: &mut R,
) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("coinpress values"));
    }
    let n = values.len() as f64;
    let beta = cfg.step_beta;
    let gamma = gaussian_tail_bound(beta);
    let widen = (2.0 / beta).ln().sqrt();

    let mut working = values.to_vec();
    let mut center = cfg.center;
    let mut radius = cfg.radius;

    for rho_step in cfg.budget_schedule() {
        let clip = ((radius * radius
            + 2.0 * radius * widen
            + gamma * gamma
            + 2.0 * gamma * widen)
            .sqrt())
        .min(radius + gamma);
        let lo = center - clip;
        let hi = center + clip;
        for v in &mut working {
            *v = v.clamp(lo, hi);
        }
        let sensitivity = 2.0 * clip / n;
        let sd = sensitivity / (2.0 * rho_step).sqrt();
        let z: f64 = StandardNormal.sample(rng);
        center = working.iter().sum::<f64>() / n + sd * z;
        // Intervals never grow.
        radius = radius.min((1.0 / n + sd * sd).sqrt() * gamma);
    }

    Ok(center)
}
