//! Differential-privacy primitives: budgets, Gaussian-mechanism calibration,
//! moment-statistic perturbation and private mean estimation.

mod coinpress;
mod gaussian;
mod moments;

pub use coinpress::{coinpress_mean, CoinPressConfig};
pub use gaussian::{analytic_gaussian_sigma, classical_gaussian_sigma, gaussian_mechanism_delta};
pub use moments::{flatten_symmetric, unflatten_symmetric, MomentStatistics};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An approximate-DP budget (epsilon, delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }
}

/// Zero-concentrated DP budget whose conversion back to approximate DP
/// guarantees the given (epsilon, delta):
/// `rho = (sqrt(eps + ln(1/delta)) - sqrt(ln(1/delta)))^2`.
pub fn zcdp_rho(budget: &PrivacyBudget) -> f64 {
    let log_inv_delta = (1.0 / budget.delta).ln();
    let s = (budget.epsilon + log_inv_delta).sqrt() - log_inv_delta.sqrt();
    s * s
}

/// Noise standard deviations for the joint release of the two moment sums,
/// tied by the ratio `c = sigma_a / sigma_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseScales {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub ratio: f64,
}

impl NoiseScales {
    pub fn from_sigma_a(sigma_a: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::invalid(format!(
                "noise ratio must be positive, got {ratio}"
            )));
        }
        if !(sigma_a >= 0.0) {
            return Err(Error::invalid(format!(
                "sigma_a must be non-negative, got {sigma_a}"
            )));
        }
        Ok(NoiseScales {
            sigma_a,
            sigma_b: sigma_a / ratio,
            ratio,
        })
    }

    /// The degenerate no-noise scales (used mainly in tests and demos).
    pub fn zero() -> Self {
        NoiseScales {
            sigma_a: 0.0,
            sigma_b: 0.0,
            ratio: 1.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_a == 0.0 && self.sigma_b == 0.0
    }
}
