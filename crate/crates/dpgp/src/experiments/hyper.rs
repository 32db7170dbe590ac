//! Hyperparameter-selection experiment: repeated private searches over a
//! candidate grid, reporting how often each candidate wins per total budget.

use rayon::prelude::*;

use crate::data::synth_sinc;
use crate::error::{Error, Result};
use crate::experiments::{ensure_task, repeat_rng, CandidateGridConfig, ExperimentConfig, TaskKind};
use crate::hyperparams::{
    select_hyperparameters, Candidate, SelectionBudget, SelectionOptions, TrainValidSplit,
};
use crate::inference::{DpGpOptions, NoiseModel};
use crate::kernels::KernelSpec;

#[derive(Debug, Clone)]
pub struct FrequencyRow {
    pub epsilon_tot: f64,
    /// None counts runs where no draw passed the guard.
    pub candidate_id: Option<usize>,
    pub noise_sd: Option<f64>,
    pub lengthscale: Option<f64>,
    pub frequency: f64,
}

#[derive(Debug, Clone)]
pub struct HyperResult {
    pub rows: Vec<FrequencyRow>,
    pub candidates: Vec<(f64, f64)>,
}

const HYPER_SALT: u64 = 0x4e_79;

/// Materialize the candidate cross product; ids follow row-major order over
/// (noise, lengthscale).
pub fn candidate_grid(grid: &CandidateGridConfig, variance: f64) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    let mut id = 0;
    for &sd in &grid.noise_sds {
        for &l in &grid.lengthscales {
            out.push(Candidate {
                spec: KernelSpec::exponentiated_quadratic(variance, l, 1)?,
                noise: NoiseModel::new(sd)?,
                id,
            });
            id += 1;
        }
    }
    if out.is_empty() {
        return Err(Error::Config("candidate grid is empty".into()));
    }
    Ok(out)
}

pub fn run_hyperparam_experiment(cfg: &ExperimentConfig) -> Result<HyperResult> {
    ensure_task(cfg, TaskKind::Hyperparams)?;
    if cfg.epsilons.is_empty() {
        return Err(Error::Config("hyperparameter runs need epsilon values".into()));
    }
    let grid = cfg.candidates.clone().unwrap_or_default();
    let candidates = candidate_grid(&grid, cfg.kernel.variance)?;
    let z = cfg.inducing.to_inducing_set()?;
    let opts = SelectionOptions {
        dp: DpGpOptions {
            noise_ratio: cfg.noise_ratio,
            rho_pd: cfg.rho_pd,
            bound_method: cfg.bound_method,
        },
        ..SelectionOptions::default()
    };

    let mut rows = Vec::new();
    for &eps_tot in &cfg.epsilons {
        let sel = SelectionBudget::solve(eps_tot, cfg.delta, cfg.gamma)?;
        let winners: Vec<Result<Option<usize>>> = (0..cfg.repeats)
            .into_par_iter()
            .map(|repeat| -> Result<Option<usize>> {
                let mut rng =
                    repeat_rng(cfg.seed, HYPER_SALT ^ eps_tot.to_bits(), repeat as u64);
                let synth = synth_sinc(cfg.n_total, cfg.noise_sd, cfg.interval, &mut rng)?;
                let split = TrainValidSplit::even(&synth.data)?;
                let outcome = select_hyperparameters(
                    &candidates,
                    &split,
                    &z,
                    cfg.output_bound,
                    &sel,
                    &opts,
                    &mut rng,
                )?;
                Ok(outcome.winner.map(|w| w.candidate_id))
            })
            .collect();

        let mut counts = vec![0usize; candidates.len()];
        let mut none_count = 0usize;
        for w in winners {
            match w? {
                Some(id) => counts[id] += 1,
                None => none_count += 1,
            }
        }
        for (id, candidate) in candidates.iter().enumerate() {
            rows.push(FrequencyRow {
                epsilon_tot: eps_tot,
                candidate_id: Some(id),
                noise_sd: Some(candidate.noise.sd()),
                lengthscale: Some(candidate.spec.lengthscales()[0]),
                frequency: counts[id] as f64 / cfg.repeats as f64,
            });
        }
        if none_count > 0 {
            rows.push(FrequencyRow {
                epsilon_tot: eps_tot,
                candidate_id: None,
                noise_sd: None,
                lengthscale: None,
                frequency: none_count as f64 / cfg.repeats as f64,
            });
        }
    }
    Ok(HyperResult {
        rows,
        candidates: candidates
            .iter()
            .map(|c| (c.noise.sd(), c.spec.lengthscales()[0]))
            .collect(),
    })
}
