//! Inference demo: fit the private posterior on a noisy 1-d task for each
//! privacy level, dump the predictive band on a dense grid and track RMSE to
//! the true function.

use rayon::prelude::*;

use crate::data::scaled_sinc;
use crate::dp::{coinpress_mean, zcdp_rho, CoinPressConfig, PrivacyBudget};
use crate::error::Result;
use crate::experiments::{ensure_task, repeat_rng, ExperimentConfig, TaskKind};
use crate::inference::{dp_gp_inference, exact_posterior, DpGpOptions, NoiseModel};
use crate::kernels::gram_matrices;
use crate::prediction::predict;

#[derive(Debug, Clone)]
pub struct BandRow {
    pub epsilon: f64,
    pub x: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone)]
pub struct InducingRow {
    pub epsilon: f64,
    pub z: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct RmseRow {
    pub epsilon: f64,
    pub repeat: usize,
    pub rmse: f64,
}

/// Additive composition of the inference budget with the optional private
/// output-centering budget.
#[derive(Debug, Clone)]
pub struct BudgetRow {
    pub epsilon_inference: f64,
    pub delta_inference: f64,
    pub epsilon_prior_mean: f64,
    pub delta_prior_mean: f64,
    pub epsilon_total: f64,
    pub delta_total: f64,
}

#[derive(Debug, Clone)]
pub struct InferenceDemoResult {
    /// Posterior band on the prediction grid, repeat 0 only.
    pub band: Vec<BandRow>,
    /// Posterior means at the inducing inputs, repeat 0 only.
    pub inducing: Vec<InducingRow>,
    /// RMSE of the posterior mean to the true function, all repeats.
    pub rmse: Vec<RmseRow>,
    /// Total privacy spend per configured epsilon.
    pub budgets: Vec<BudgetRow>,
}

const INFER_SALT: u64 = 0x1f_e4;

struct RepeatOutput {
    band: Vec<BandRow>,
    inducing: Vec<InducingRow>,
    rmse: Vec<RmseRow>,
}

pub fn run_inference_demo(cfg: &ExperimentConfig) -> Result<InferenceDemoResult> {
    ensure_task(cfg, TaskKind::Infer)?;
    let spec = cfg.kernel.to_spec()?;
    let z = cfg.inducing.to_inducing_set()?;
    let noise = NoiseModel::new(cfg.noise_sd)?;
    let opts = DpGpOptions {
        noise_ratio: cfg.noise_ratio,
        rho_pd: cfg.rho_pd,
        bound_method: cfg.bound_method,
    };

    // The prediction grid and the sinc ground truth only make sense for the
    // 1-d synthetic task; CSV data predicts at its own inputs with no truth.
    let synthetic_sinc = cfg.data_csv.is_none()
        && matches!(cfg.synth.unwrap_or(super::SynthKind::Sinc), super::SynthKind::Sinc);
    let grid_1d: Vec<Vec<f64>> = (0..cfg.prediction_points)
        .map(|i| {
            let t = i as f64 / (cfg.prediction_points - 1).max(1) as f64;
            vec![cfg.interval.0 + t * (cfg.interval.1 - cfg.interval.0)]
        })
        .collect();

    let mut epsilons = cfg.epsilons.clone();
    if cfg.include_non_private {
        epsilons.push(f64::INFINITY);
    }

    let outputs: Vec<Result<RepeatOutput>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|repeat| -> Result<RepeatOutput> {
            let mut rng = repeat_rng(cfg.seed, INFER_SALT, repeat as u64);
            let mut dataset = super::resolve_dataset(cfg, &mut rng)?;

            // Optional private centering of the outputs before inference.
            let mut prior_mean = 0.0;
            if let Some(budget_cfg) = &cfg.prior_mean_budget {
                let budget = PrivacyBudget::new(budget_cfg.epsilon, budget_cfg.delta)?;
                let clipped: Vec<f64> = dataset
                    .outputs()
                    .iter()
                    .map(|y| y.clamp(-cfg.output_bound, cfg.output_bound))
                    .collect();
                let mean_cfg =
                    CoinPressConfig::new(zcdp_rho(&budget), 0.0, cfg.output_bound)?;
                prior_mean = coinpress_mean(&clipped, &mean_cfg, &mut rng)?;
                dataset = dataset.with_centered_outputs(prior_mean);
            }

            let mut band = Vec::new();
            let mut inducing = Vec::new();
            let mut rmse = Vec::new();

            for &eps in &epsilons {
                let posterior = if eps.is_infinite() {
                    let y: Vec<f64> = dataset
                        .outputs()
                        .iter()
                        .map(|v| v.clamp(-cfg.output_bound, cfg.output_bound))
                        .collect();
                    let km = gram_matrices(&spec, &z, dataset.inputs())?;
                    exact_posterior(&km, &y, &noise, spec.jitter())?
                } else {
                    let budget = PrivacyBudget::new(eps, cfg.delta)?;
                    dp_gp_inference(
                        dataset.inputs(),
                        dataset.outputs(),
                        &z,
                        &spec,
                        &noise,
                        cfg.output_bound,
                        &budget,
                        &opts,
                        &mut rng,
                    )?
                    .posterior
                };

                let query: &[Vec<f64>] = if dataset.input_dim() == 1 {
                    &grid_1d
                } else {
                    dataset.inputs()
                };
                let pred = predict(&posterior, &spec, &z, query, true)?;
                let vars = pred.variances();
                if synthetic_sinc {
                    let se: f64 = pred
                        .mean
                        .iter()
                        .zip(query.iter().map(|x| scaled_sinc(x[0])))
                        .map(|(m, f)| (m + prior_mean - f) * (m + prior_mean - f))
                        .sum::<f64>()
                        / query.len() as f64;
                    rmse.push(RmseRow {
                        epsilon: eps,
                        repeat,
                        rmse: se.sqrt(),
                    });
                }

                if repeat == 0 {
                    for (i, x) in query.iter().enumerate() {
                        band.push(BandRow {
                            epsilon: eps,
                            x: x[0],
                            mean: pred.mean[i] + prior_mean,
                            sd: vars[i].sqrt(),
                        });
                    }
                    for (j, zp) in z.points().iter().enumerate() {
                        inducing.push(InducingRow {
                            epsilon: eps,
                            z: zp[0],
                            mean: posterior.mean()[j] + prior_mean,
                        });
                    }
                }
            }
            Ok(RepeatOutput {
                band,
                inducing,
                rmse,
            })
        })
        .collect();

    let mut band = Vec::new();
    let mut inducing = Vec::new();
    let mut rmse = Vec::new();
    for out in outputs {
        let out = out?;
        band.extend(out.band);
        inducing.extend(out.inducing);
        rmse.extend(out.rmse);
    }

    let (mean_eps, mean_delta) = cfg
        .prior_mean_budget
        .map(|b| (b.epsilon, b.delta))
        .unwrap_or((0.0, 0.0));
    let budgets = epsilons
        .iter()
        .filter(|e| e.is_finite())
        .map(|&eps| BudgetRow {
            epsilon_inference: eps,
            delta_inference: cfg.delta,
            epsilon_prior_mean: mean_eps,
            delta_prior_mean: mean_delta,
            epsilon_total: eps + mean_eps,
            delta_total: cfg.delta + mean_delta,
        })
        .collect();

    Ok(InferenceDemoResult {
        band,
        inducing,
        rmse,
        budgets,
    })
}
