//! Coverage calibration: fit the private posterior on one half of a dataset
//! drawn from a matching prior, then measure how often held-out points fall
//! inside central predictive intervals, for the full noise-aware covariance
//! and for a naive variant without the mechanism-noise terms.

use rayon::prelude::*;

use crate::data::synth_gp_draw;
use crate::dp::PrivacyBudget;
use crate::error::{Error, Result};
use crate::experiments::{ensure_task, repeat_rng, ExperimentConfig, TaskKind};
use crate::inference::{dp_gp_inference, DpGpOptions, NoiseModel};
use crate::prediction::predict;
use crate::stats::{self, std_normal_quantile};

#[derive(Debug, Clone)]
pub struct CoverageRow {
    pub noise_sd: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub coverage_full: f64,
    pub coverage_full_2se: f64,
    pub coverage_naive: f64,
    pub coverage_naive_2se: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub rows: Vec<CoverageRow>,
}

const CALIBRATE_SALT: u64 = 0xca_1b;

/// Per-repeat coverage pairs (full, naive), indexed by scenario then alpha.
type RepeatCoverage = Vec<Vec<(f64, f64)>>;

pub fn run_calibration(cfg: &ExperimentConfig) -> Result<CalibrationResult> {
    ensure_task(cfg, TaskKind::Calibrate)?;
    if cfg.alphas.is_empty() {
        return Err(Error::Config("calibration needs at least one alpha".into()));
    }
    if cfg.epsilons.is_empty() {
        return Err(Error::Config("calibration needs at least one epsilon".into()));
    }
    let noise_sds = if cfg.noise_sds.is_empty() {
        vec![cfg.noise_sd]
    } else {
        cfg.noise_sds.clone()
    };
    let spec = cfg.kernel.to_spec()?;
    let z = cfg.inducing.to_inducing_set()?;
    let opts = DpGpOptions {
        noise_ratio: cfg.noise_ratio,
        rho_pd: cfg.rho_pd,
        bound_method: cfg.bound_method,
    };

    let per_repeat: Vec<Result<RepeatCoverage>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|repeat| -> Result<RepeatCoverage> {
            let mut rng = repeat_rng(cfg.seed, CALIBRATE_SALT, repeat as u64);
            // One latent draw per repeat, shared across noise scenarios.
            let latent_synth = synth_gp_draw(&spec, cfg.n_total, 0.0, cfg.interval, &mut rng)?;
            let inputs = latent_synth.data.inputs().to_vec();
            let latent = latent_synth.latent.clone();

            let mut scenario_cov = Vec::new();
            for &sigma in &noise_sds {
                let noise = NoiseModel::new(sigma)?;
                let outputs: Vec<f64> = latent
                    .iter()
                    .map(|f| {
                        let z: f64 =
                            rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                        f + sigma * z
                    })
                    .collect();
                let cut = inputs.len() / 2;
                let (train_x, test_x) = inputs.split_at(cut);
                let (train_y, test_y) = outputs.split_at(cut);

                for &eps in &cfg.epsilons {
                    let budget = PrivacyBudget::new(eps, cfg.delta)?;
                    let fit = dp_gp_inference(
                        train_x,
                        train_y,
                        &z,
                        &spec,
                        &noise,
                        cfg.output_bound,
                        &budget,
                        &opts,
                        &mut rng,
                    )?;
                    let naive = fit.posterior.without_noise_corrections();

                    let pred_full = predict(&fit.posterior, &spec, &z, test_x, true)?;
                    let pred_naive = predict(&naive, &spec, &z, test_x, true)?;
                    let var_full = pred_full.variances();
                    let var_naive = pred_naive.variances();

                    let mut alpha_cov = Vec::with_capacity(cfg.alphas.len());
                    for &alpha in &cfg.alphas {
                        let q = std_normal_quantile(0.5 * (1.0 + alpha));
                        let count = |means: &nalgebra::DVector<f64>,
                                     vars: &nalgebra::DVector<f64>| {
                            test_y
                                .iter()
                                .enumerate()
                                .filter(|(i, y)| {
                                    let half = q * (vars[*i] + sigma * sigma).sqrt();
                                    (**y - means[*i]).abs() <= half
                                })
                                .count() as f64
                                / test_y.len() as f64
                        };
                        alpha_cov.push((
                            count(&pred_full.mean, &var_full),
                            count(&pred_naive.mean, &var_naive),
                        ));
                    }
                    scenario_cov.push(alpha_cov);
                }
            }
            Ok(scenario_cov)
        })
        .collect();

    let mut collected: Vec<RepeatCoverage> = Vec::with_capacity(cfg.repeats);
    for r in per_repeat {
        collected.push(r?);
    }

    let mut rows = Vec::new();
    let mut scenario_idx = 0;
    for &sigma in &noise_sds {
        for &eps in &cfg.epsilons {
            for (a_idx, &alpha) in cfg.alphas.iter().enumerate() {
                let full: Vec<f64> = collected
                    .iter()
                    .map(|rep| rep[scenario_idx][a_idx].0)
                    .collect();
                let naive: Vec<f64> = collected
                    .iter()
                    .map(|rep| rep[scenario_idx][a_idx].1)
                    .collect();
                rows.push(CoverageRow {
                    noise_sd: sigma,
                    epsilon: eps,
                    alpha,
                    coverage_full: stats::mean(&full),
                    coverage_full_2se: 2.0 * stats::standard_error(&full),
                    coverage_naive: stats::mean(&naive),
                    coverage_naive_2se: 2.0 * stats::standard_error(&naive),
                    repeats: cfg.repeats,
                });
            }
            scenario_idx += 1;
        }
    }
    Ok(CalibrationResult { rows })
}
