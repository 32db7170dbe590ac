//! Config-driven experiment runners with CSV results and a JSON sidecar
//! carrying the resolved config.
//!
//! Identical config and seed produce byte-identical result files: repeats run
//! on independent derived streams and are aggregated in index order.

mod calibrate;
mod config;
mod hyper;
mod infer;

pub use calibrate::{run_calibration, CalibrationResult, CoverageRow};
pub use config::{
    BudgetConfig, CandidateGridConfig, ExperimentConfig, InducingGridConfig, KernelConfig,
    SynthKind, TaskKind,
};
pub use hyper::{run_hyperparam_experiment, FrequencyRow, HyperResult};
pub use infer::{run_inference_demo, BandRow, InducingRow, InferenceDemoResult, RmseRow};

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::data::{save_csv, synth_gp_draw, synth_sinc, RegressionDataset};
use crate::error::{Error, Result};

/// Independent stream for one repeat of one experiment stage.
pub(crate) fn repeat_rng(seed: u64, salt: u64, repeat: u64) -> StdRng {
    // SplitMix64 over the combined words keeps streams uncorrelated.
    let mut x = seed
        .wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(repeat.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    StdRng::seed_from_u64(x)
}

pub(crate) fn write_csv(
    path: &Path,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}

/// Run the configured task and write its result files into `out_dir`.
/// Returns the paths written.
pub fn run_task(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let sidecar = out_dir.join(format!("{}_config.json", cfg.task));
    cfg.save(&sidecar)?;
    written.push(sidecar);

    match cfg.task {
        TaskKind::Infer => {
            let result = run_inference_demo(cfg)?;
            let band_path = out_dir.join("infer_band.csv");
            write_csv(
                &band_path,
                "epsilon,x,mean,sd",
                result.band.iter().map(|r| {
                    format!("{},{},{},{}", fmt_eps(r.epsilon), r.x, r.mean, r.sd)
                }),
            )?;
            written.push(band_path);

            let inducing_path = out_dir.join("infer_inducing.csv");
            write_csv(
                &inducing_path,
                "epsilon,z,mean",
                result.inducing.iter().map(|r| {
                    format!("{},{},{}", fmt_eps(r.epsilon), r.z, r.mean)
                }),
            )?;
            written.push(inducing_path);

            let rmse_path = out_dir.join("infer_rmse.csv");
            write_csv(
                &rmse_path,
                "epsilon,repeat,rmse",
                result.rmse.iter().map(|r| {
                    format!("{},{},{}", fmt_eps(r.epsilon), r.repeat, r.rmse)
                }),
            )?;
            written.push(rmse_path);

            let budget_path = out_dir.join("infer_budget.csv");
            write_csv(
                &budget_path,
                "epsilon_inference,delta_inference,epsilon_prior_mean,delta_prior_mean,epsilon_total,delta_total",
                result.budgets.iter().map(|r| {
                    format!(
                        "{},{},{},{},{},{}",
                        r.epsilon_inference,
                        r.delta_inference,
                        r.epsilon_prior_mean,
                        r.delta_prior_mean,
                        r.epsilon_total,
                        r.delta_total
                    )
                }),
            )?;
            written.push(budget_path);
        }
        TaskKind::Calibrate => {
            let result = run_calibration(cfg)?;
            let path = out_dir.join("calibrate_coverage.csv");
            write_csv(
                &path,
                "noise_sd,epsilon,alpha,coverage_full,coverage_full_2se,coverage_naive,coverage_naive_2se,repeats",
                result.rows.iter().map(|r| {
                    format!(
                        "{},{},{},{},{},{},{},{}",
                        r.noise_sd,
                        r.epsilon,
                        r.alpha,
                        r.coverage_full,
                        r.coverage_full_2se,
                        r.coverage_naive,
                        r.coverage_naive_2se,
                        r.repeats
                    )
                }),
            )?;
            written.push(path);
        }
        TaskKind::Hyperparams => {
            let result = run_hyperparam_experiment(cfg)?;
            let path = out_dir.join("hyperparams_frequency.csv");
            write_csv(
                &path,
                "epsilon_tot,candidate_id,noise_sd,lengthscale,frequency",
                result.rows.iter().map(|r| {
                    format!(
                        "{},{},{},{},{}",
                        r.epsilon_tot,
                        r.candidate_id
                            .map(|i| i.to_string())
                            .unwrap_or_else(|| "none".into()),
                        r.noise_sd.map(|v| v.to_string()).unwrap_or_default(),
                        r.lengthscale.map(|v| v.to_string()).unwrap_or_default(),
                        r.frequency
                    )
                }),
            )?;
            written.push(path);
        }
        TaskKind::Synth => {
            let synth = generate_synthetic(cfg)?;
            let data_path = out_dir.join("synth_data.csv");
            save_csv(&synth.0, &data_path)?;
            written.push(data_path);
            let latent_path = out_dir.join("synth_latent.csv");
            write_csv(
                &latent_path,
                "x1,f",
                synth
                    .0
                    .inputs()
                    .iter()
                    .zip(&synth.1)
                    .map(|(x, f)| format!("{},{}", x[0], f)),
            )?;
            written.push(latent_path);
        }
    }
    Ok(written)
}

fn fmt_eps(eps: f64) -> String {
    if eps.is_infinite() {
        "inf".to_string()
    } else {
        format!("{eps}")
    }
}

fn generate_synthetic(cfg: &ExperimentConfig) -> Result<(RegressionDataset, Vec<f64>)> {
    let mut rng = repeat_rng(cfg.seed, 0x53_59_4e, 0);
    let kind = cfg.synth.unwrap_or(SynthKind::Sinc);
    let synth = match kind {
        SynthKind::Sinc => synth_sinc(cfg.n_total, cfg.noise_sd, cfg.interval, &mut rng)?,
        SynthKind::GpDraw => {
            let spec = cfg.kernel.to_spec()?;
            synth_gp_draw(&spec, cfg.n_total, cfg.noise_sd, cfg.interval, &mut rng)?
        }
    };
    Ok((synth.data, synth.latent))
}

/// Load the dataset an infer run should use: CSV when configured, otherwise
/// freshly generated synthetic data.
pub(crate) fn resolve_dataset(cfg: &ExperimentConfig, rng: &mut StdRng) -> Result<RegressionDataset> {
    match &cfg.data_csv {
        Some(path) => crate::data::load_csv(path),
        None => {
            let kind = cfg.synth.unwrap_or(SynthKind::Sinc);
            let synth = match kind {
                SynthKind::Sinc => synth_sinc(cfg.n_total, cfg.noise_sd, cfg.interval, rng)?,
                SynthKind::GpDraw => {
                    let spec = cfg.kernel.to_spec()?;
                    synth_gp_draw(&spec, cfg.n_total, cfg.noise_sd, cfg.interval, rng)?
                }
            };
            Ok(synth.data)
        }
    }
}

pub(crate) fn ensure_task(cfg: &ExperimentConfig, task: TaskKind) -> Result<()> {
    if cfg.task != task {
        return Err(Error::Config(format!(
            "config task is '{}', expected '{}'",
            cfg.task, task
        )));
    }
    Ok(())
}
