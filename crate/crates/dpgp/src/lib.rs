//! Differentially private sparse variational Gaussian-process regression.
//!
//! The model publishes a Gaussian approximation over function values at a
//! fixed set of inducing inputs. The only data-dependent quantities are two
//! moment sums, released once through a jointly calibrated Gaussian
//! mechanism; everything downstream (posterior, predictions) is
//! post-processing. The posterior covariance carries two extra terms that
//! account for the mechanism noise, and hyperparameters can be chosen
//! privately by a randomly stopped search scored with a private validation
//! log-likelihood.
//!
//! Capabilities, one runnable example each (`cargo run --release --example <name>`):
//!
//! - `inference_demo` -- private posterior on a noisy 1-d task across budgets
//! - `sensitivity_bounds` -- kernel-norm bounds vs an empirical maximum
//! - `noise_calibration` -- exact Gaussian-mechanism calibration vs classical
//! - `private_mean` -- iterative private mean estimation from loose bounds
//! - `uncertainty_calibration` -- coverage of noise-aware vs naive intervals
//! - `hyperparameter_search` -- private selection over a candidate grid
//! - `csv_workflow` -- synthesize, save, load and fit from CSV files
//!
//! The `dpgp` binary drives the same experiment runners from JSON configs;
//! see the repository README.

// Validations use `!(x > 0.0)` so NaN fails them too; index loops mirror
// the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod data;
pub mod dp;
pub mod error;
pub mod experiments;
pub mod hyperparams;
pub mod inference;
pub mod kernels;
pub mod prediction;
pub mod sensitivity;
pub mod stats;

mod linalg;

pub use error::{Error, Result};
