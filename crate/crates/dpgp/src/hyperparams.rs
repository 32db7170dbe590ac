//! Private selection of kernel and noise hyperparameters: a random-stopping
//! search over candidates where each draw fits a private posterior on the
//! training split and scores it with a privately estimated validation
//! log-likelihood.

use rand::Rng;
use rand::RngExt;

use crate::data::RegressionDataset;
use crate::dp::{coinpress_mean, zcdp_rho, CoinPressConfig, PrivacyBudget};
use crate::error::{Error, Result};
use crate::inference::{dp_gp_inference, DpGpOptions, NoiseModel, VariationalPosterior};
use crate::kernels::{InducingSet, KernelSpec};
use crate::prediction::{clip_loglik, predict, validation_loglik_terms};

/// One kernel/noise combination under consideration.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub spec: KernelSpec,
    pub noise: NoiseModel,
    pub id: usize,
}

/// Budget split for the selection procedure.
///
/// From the target `(epsilon_tot, delta_tot)` and stopping probability
/// `gamma`, the stopping parameter `t0` solves `t (1 - ln t) = delta_tot` on
/// (0, 1); the per-evaluation budget and the draw cap follow from it. `T`
/// uses a ceiling, which can overshoot the delta recomposition by at most one
/// `sqrt(2 delta)` term.
#[derive(Debug, Clone, Copy)]
pub struct SelectionBudget {
    pub epsilon_tot: f64,
    pub delta_tot: f64,
    pub gamma: f64,
    pub t0: f64,
    pub delta: f64,
    pub delta_2: f64,
    pub epsilon: f64,
    pub max_draws: usize,
}

/// Root of `t (1 - ln t) = target` on (0, 1]; the map is strictly increasing
/// there, so bisection converges to the unique root.
pub fn solve_stopping_parameter(target: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::invalid(format!(
            "stopping target must lie in (0, 1], got {target}"
        )));
    }
    if target == 1.0 {
        return Ok(1.0);
    }
    let g = |t: f64| t * (1.0 - t.ln());
    let mut lo = 1e-300;
    let mut hi = 1.0;
    for _ in 0..2000 {
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

impl SelectionBudget {
    pub fn solve(epsilon_tot: f64, delta_tot: f64, gamma: f64) -> Result<Self> {
        if !(epsilon_tot > 0.0) {
            return Err(Error::invalid("epsilon_tot must be positive"));
        }
        if !(delta_tot > 0.0 && delta_tot < 1.0) {
            return Err(Error::invalid("delta_tot must lie in (0, 1)"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid("gamma must lie in (0, 1)"));
        }
        let t0 = solve_stopping_parameter(delta_tot)?;
        let delta = gamma * gamma * t0 * t0 / 2.0;
        let delta_2 = (2.0 * delta).sqrt() / gamma;
        let epsilon = epsilon_tot / 3.0 - (2.0 * delta).sqrt();
        if epsilon <= 0.0 {
            return Err(Error::BudgetTooSmall);
        }
        let max_draws = ((1.0 / gamma) * (1.0 / delta_2).ln()).ceil() as usize;
        Ok(SelectionBudget {
            epsilon_tot,
            delta_tot,
            gamma,
            t0,
            delta,
            delta_2,
            epsilon,
            max_draws: max_draws.max(1),
        })
    }

    /// Budget spent by each candidate evaluation (inference plus scoring).
    pub fn per_eval_budget(&self) -> Result<PrivacyBudget> {
        PrivacyBudget::new(self.epsilon, self.delta)
    }
}

/// Disjoint training/validation split. The constructor rejects bit-identical
/// rows shared between the two parts.
#[derive(Debug, Clone)]
pub struct TrainValidSplit {
    train: RegressionDataset,
    valid: RegressionDataset,
}

impl TrainValidSplit {
    pub fn new(train: RegressionDataset, valid: RegressionDataset) -> Result<Self> {
        if train.input_dim() != valid.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: train.input_dim(),
                got: valid.input_dim(),
            });
        }
        for (ti, ty) in train.inputs().iter().zip(train.outputs()) {
            for (vi, vy) in valid.inputs().iter().zip(valid.outputs()) {
                if ti == vi && ty == vy {
                    return Err(Error::invalid(
                        "training and validation splits share a record",
                    ));
                }
            }
        }
        Ok(TrainValidSplit { train, valid })
    }

    /// Split a dataset down the middle.
    pub fn even(dataset: &RegressionDataset) -> Result<Self> {
        let (train, valid) = dataset.split_half();
        Self::new(train, valid)
    }

    pub fn train(&self) -> &RegressionDataset {
        &self.train
    }

    pub fn valid(&self) -> &RegressionDataset {
        &self.valid
    }
}

/// Scoring knobs for candidate evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SelectionOptions {
    pub dp: DpGpOptions,
    pub mean_iterations: usize,
    pub mean_last_fraction: f64,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            dp: DpGpOptions::default(),
            mean_iterations: 12,
            mean_last_fraction: 0.75,
        }
    }
}

/// One evaluated draw: the fitted posterior, its private validation score
/// (the scaled private mean estimate), and whether the estimate respected
/// the attainable upper bound.
#[derive(Debug, Clone)]
pub struct EvaluationOutcome {
    pub posterior: VariationalPosterior,
    pub score: f64,
    pub guard_passed: bool,
}

/// Fit one candidate on the training split and score it on the validation
/// split. Inference sees only the training data; scoring sees only the
/// fitted posterior and the validation data.
pub fn evaluate_candidate<R: Rng + ?Sized>(
    candidate: &Candidate,
    split: &TrainValidSplit,
    z: &InducingSet,
    output_bound: f64,
    budget: &PrivacyBudget,
    opts: &SelectionOptions,
    rng: &mut R,
) -> Result<EvaluationOutcome> {
    let fit = dp_gp_inference(
        split.train().inputs(),
        split.train().outputs(),
        z,
        &candidate.spec,
        &candidate.noise,
        output_bound,
        budget,
        &opts.dp,
        rng,
    )?;
    let (score, guard_passed) = score_on_validation(
        &fit.posterior,
        candidate,
        split.valid(),
        z,
        output_bound,
        budget,
        opts,
        rng,
    )?;
    Ok(EvaluationOutcome {
        posterior: fit.posterior,
        score,
        guard_passed,
    })
}

/// Private validation score of an already-fitted posterior: per-point
/// predictive log-likelihoods, clipped, privately averaged, and scaled by
/// the validation size. Returns the score and the guard outcome (the mean
/// estimate must not exceed the attainable per-point maximum).
#[allow(clippy::too_many_arguments)]
pub fn score_on_validation<R: Rng + ?Sized>(
    posterior: &VariationalPosterior,
    candidate: &Candidate,
    valid: &RegressionDataset,
    z: &InducingSet,
    output_bound: f64,
    budget: &PrivacyBudget,
    opts: &SelectionOptions,
    rng: &mut R,
) -> Result<(f64, bool)> {
    if valid.is_empty() {
        return Err(Error::EmptyInput("validation split"));
    }
    let pred = predict(posterior, &candidate.spec, z, valid.inputs(), true)?;
    let terms = validation_loglik_terms(&pred, valid.outputs(), &candidate.noise)?;
    let clipped = clip_loglik(&terms, output_bound, &candidate.noise);

    let rho = zcdp_rho(budget);
    let cfg = CoinPressConfig::new(rho, clipped.center, clipped.radius)?
        .with_iterations(opts.mean_iterations)?
        .with_last_iteration_fraction(opts.mean_last_fraction)?;
    let mean_estimate = coinpress_mean(&clipped.terms, &cfg, rng)?;

    let guard_passed = mean_estimate <= clipped.upper();
    Ok((valid.len() as f64 * mean_estimate, guard_passed))
}

/// The winning candidate (if any draw passed the guard).
#[derive(Debug, Clone)]
pub struct SelectedModel {
    pub candidate_id: usize,
    pub posterior: VariationalPosterior,
}

/// Result of the selection loop.
#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub winner: Option<SelectedModel>,
    pub v_opt: f64,
    pub draws_used: usize,
}

/// Randomly stopped private search over candidates.
///
/// Each step draws a candidate uniformly, evaluates it at the per-evaluation
/// budget, keeps it when the guard passes and the score strictly improves
/// (ties keep the earlier winner), then stops with probability `gamma`; at
/// most `max_draws` steps run. A draw whose regularized matrix comes out
/// indefinite is skipped as scoreless rather than aborting the search.
pub fn select_hyperparameters<R: Rng + ?Sized>(
    candidates: &[Candidate],
    split: &TrainValidSplit,
    z: &InducingSet,
    output_bound: f64,
    sel: &SelectionBudget,
    opts: &SelectionOptions,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("candidate set"));
    }
    let budget = sel.per_eval_budget()?;
    let mut v_opt = f64::NEG_INFINITY;
    let mut winner: Option<SelectedModel> = None;
    let mut draws_used = 0usize;

    for _ in 0..sel.max_draws {
        draws_used += 1;
        let idx = rng.random_range(0..candidates.len());
        let candidate = &candidates[idx];
        match evaluate_candidate(candidate, split, z, output_bound, &budget, opts, rng) {
            Ok(outcome) => {
                if outcome.guard_passed && outcome.score > v_opt {
                    v_opt = outcome.score;
                    winner = Some(SelectedModel {
                        candidate_id: candidate.id,
                        posterior: outcome.posterior,
                    });
                }
            }
            // An indefinite regularized matrix is an anticipated low-budget
            // outcome; the draw simply scores nothing.
            Err(Error::NotPositiveDefinite { .. }) => {}
            Err(e) => return Err(e),
        }
        if rng.random_range(0.0..1.0) < sel.gamma {
            break;
        }
    }

    Ok(SelectionOutcome {
        winner,
        v_opt,
        draws_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_sinc;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn stopping_parameter_boundary_and_monotonicity() {
        assert_eq!(solve_stopping_parameter(1.0).unwrap(), 1.0);
        let t_small = solve_stopping_parameter(1e-6).unwrap();
        let t_mid = solve_stopping_parameter(1e-4).unwrap();
        let t_big = solve_stopping_parameter(1e-2).unwrap();
        assert!(t_small < t_mid && t_mid < t_big);
        for (t, target) in [(t_small, 1e-6), (t_mid, 1e-4), (t_big, 1e-2)] {
            let recomposed = t * (1.0 - t.ln());
            assert!(
                (recomposed - target).abs() < 1e-10 * target,
                "t={t} recomposed={recomposed} target={target}"
            );
        }
        assert!(solve_stopping_parameter(0.0).is_err());
        assert!(solve_stopping_parameter(1.5).is_err());
    }

    #[test]
    fn budget_solution_matches_recomposition() {
        let sel = SelectionBudget::solve(30.0, 1e-4, 0.01).unwrap();
        // t0 for delta_tot = 1e-4 is near 7.84e-6 and yields T near 1176.
        assert!((sel.t0 - 7.84e-6).abs() < 2e-8, "t0={}", sel.t0);
        assert_eq!(sel.max_draws, 1176);
        assert!((sel.delta_2 - sel.t0).abs() < 1e-12 * sel.t0);

        // epsilon recomposition is exact by construction.
        let eps_back = 3.0 * sel.epsilon + 3.0 * (2.0 * sel.delta).sqrt();
        assert!((eps_back - 30.0).abs() < 1e-9);

        // delta recomposition with the un-ceiled draw count.
        let t_real = (1.0 / sel.gamma) * (1.0 / sel.delta_2).ln();
        let delta_back = (2.0 * sel.delta).sqrt() * t_real + sel.delta_2;
        assert!((delta_back - 1e-4).abs() < 1e-12);

        // Ceiling overshoot is at most one sqrt(2 delta) term.
        let delta_ceil = (2.0 * sel.delta).sqrt() * sel.max_draws as f64 + sel.delta_2;
        assert!(delta_ceil <= 1e-4 + (2.0 * sel.delta).sqrt() + 1e-12);
    }

    #[test]
    fn budget_rejects_too_small_epsilon() {
        // sqrt(2 delta) = gamma t0; epsilon_tot/3 below it must fail.
        let t0 = solve_stopping_parameter(1e-4).unwrap();
        let gamma = 0.5;
        let eps_limit = 3.0 * gamma * t0;
        assert!(matches!(
            SelectionBudget::solve(eps_limit * 0.5, 1e-4, gamma),
            Err(Error::BudgetTooSmall)
        ));
        assert!(SelectionBudget::solve(eps_limit * 2.0, 1e-4, gamma).is_ok());
    }

    #[test]
    fn split_rejects_shared_records() {
        let a = RegressionDataset::new(vec![vec![1.0], vec![2.0]], vec![0.1, 0.2]).unwrap();
        let b = RegressionDataset::new(vec![vec![2.0], vec![3.0]], vec![0.2, 0.3]).unwrap();
        assert!(TrainValidSplit::new(a.clone(), b).is_err());
        let c = RegressionDataset::new(vec![vec![4.0]], vec![0.4]).unwrap();
        assert!(TrainValidSplit::new(a, c).is_ok());
    }

    fn sinc_split(seed: u64, n: usize) -> TrainValidSplit {
        let mut rng = StdRng::seed_from_u64(seed);
        let synth = synth_sinc(n, 0.1, (-4.0, 4.0), &mut rng).unwrap();
        TrainValidSplit::even(&synth.data).unwrap()
    }

    fn true_candidate() -> Candidate {
        Candidate {
            spec: KernelSpec::exponentiated_quadratic(1.0, 1.0, 1).unwrap(),
            noise: NoiseModel::new(0.1).unwrap(),
            id: 0,
        }
    }

    #[test]
    fn single_candidate_certain_stop_evaluates_once() {
        let split = sinc_split(0, 512);
        let z = InducingSet::grid_1d(-3.0, 3.0, 9).unwrap();
        // gamma close to 1: the loop must stop after the first draw.
        let sel = SelectionBudget::solve(30.0, 1e-4, 0.999_999).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let out = select_hyperparameters(
            &[true_candidate()],
            &split,
            &z,
            1.0,
            &sel,
            &SelectionOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.draws_used, 1);
        let winner = out.winner.expect("one evaluation should pass the guard");
        assert_eq!(winner.candidate_id, 0);
        assert!(out.v_opt.is_finite());
    }

    #[test]
    fn near_noiseless_score_matches_clipped_sum() {
        // Huge budget: the private mean collapses onto the clipped average.
        // An overdispersed candidate keeps every term close to the bulk, so
        // the iterative projections never move a value.
        let split = sinc_split(2, 600);
        let z = InducingSet::grid_1d(-3.0, 3.0, 9).unwrap();
        let candidate = Candidate {
            spec: KernelSpec::exponentiated_quadratic(1.0, 1.0, 1).unwrap(),
            noise: NoiseModel::new(0.3).unwrap(),
            id: 0,
        };
        let budget = PrivacyBudget::new(1e12, 0.5).unwrap();
        let opts = SelectionOptions::default();
        let mut rng = StdRng::seed_from_u64(3);
        let outcome =
            evaluate_candidate(&candidate, &split, &z, 1.0, &budget, &opts, &mut rng).unwrap();
        assert!(outcome.guard_passed);

        // Rebuild the exact clipped sum from the returned posterior.
        let pred = predict(&outcome.posterior, &candidate.spec, &z, split.valid().inputs(), true)
            .unwrap();
        let terms =
            validation_loglik_terms(&pred, split.valid().outputs(), &candidate.noise).unwrap();
        let clipped = clip_loglik(&terms, 1.0, &candidate.noise);
        let exact_sum: f64 = clipped.terms.iter().sum();
        let rel = (outcome.score - exact_sum).abs() / exact_sum.abs().max(1.0);
        assert!(rel < 1e-6, "score {} vs exact {exact_sum}", outcome.score);
    }

    #[test]
    fn wild_estimates_are_marked_guard_failed() {
        // At a tiny per-evaluation budget the private mean estimate
        // regularly exceeds the attainable per-point maximum; such draws are
        // marked invalid rather than winning the selection.
        let split = sinc_split(6, 512);
        let z = InducingSet::grid_1d(-3.0, 3.0, 9).unwrap();
        let candidate = true_candidate();
        let budget = PrivacyBudget::new(0.1, 1e-14).unwrap();
        let opts = SelectionOptions::default();
        let mut passed = 0;
        let mut failed = 0;
        for seed in 0..40u64 {
            let mut rng = StdRng::seed_from_u64(90_000 + seed);
            match evaluate_candidate(&candidate, &split, &z, 1.0, &budget, &opts, &mut rng) {
                Ok(out) => {
                    if out.guard_passed {
                        passed += 1;
                    } else {
                        failed += 1;
                    }
                }
                Err(Error::NotPositiveDefinite { .. }) => {}
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        assert!(passed > 0, "no draw ever passed the guard");
        assert!(failed > 0, "no draw ever failed the guard");
    }

    #[test]
    fn draws_capped_and_winner_id_stable() {
        let split = sinc_split(4, 256);
        let z = InducingSet::grid_1d(-3.0, 3.0, 9).unwrap();
        let sel = SelectionBudget::solve(30.0, 1e-4, 0.2).unwrap();
        let candidates = vec![
            true_candidate(),
            Candidate {
                spec: KernelSpec::exponentiated_quadratic(1.0, 3.0, 1).unwrap(),
                noise: NoiseModel::new(0.3).unwrap(),
                id: 1,
            },
        ];
        let mut rng = StdRng::seed_from_u64(5);
        let out = select_hyperparameters(
            &candidates,
            &split,
            &z,
            1.0,
            &sel,
            &SelectionOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(out.draws_used <= sel.max_draws);
        if let Some(w) = &out.winner {
            assert!(w.candidate_id <= 1);
        }
    }
}
