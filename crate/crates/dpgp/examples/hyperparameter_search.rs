//! Private hyperparameter selection: a randomly stopped search over a grid
//! of kernel lengthscales and noise levels, paying one evaluation budget in
//! expectation rather than one per candidate.
//!
//! ```bash
//! cargo run --release --example hyperparameter_search
//! ```

use dpgp::data::synth_sinc;
use dpgp::hyperparams::{
    select_hyperparameters, Candidate, SelectionBudget, SelectionOptions, TrainValidSplit,
};
use dpgp::inference::NoiseModel;
use dpgp::kernels::{InducingSet, KernelSpec};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> dpgp::Result<()> {
    let mut candidates = Vec::new();
    for &sd in &[0.1 / 3.0, 0.1, 0.3] {
        for &l in &[1.0 / 3.0, 1.0, 3.0] {
            candidates.push(Candidate {
                spec: KernelSpec::exponentiated_quadratic(1.0, l, 1)?,
                noise: NoiseModel::new(sd)?,
                id: candidates.len(),
            });
        }
    }
    let z = InducingSet::grid_1d(-3.0, 3.0, 9)?;
    let sel = SelectionBudget::solve(30.0, 1e-4, 0.01)?;
    println!(
        "total budget (30, 1e-4) splits into per-evaluation ({:.4}, {:.3e}), at most {} draws",
        sel.epsilon, sel.delta, sel.max_draws
    );

    let mut rng = StdRng::seed_from_u64(17);
    let synth = synth_sinc(2048, 0.1, (-4.0, 4.0), &mut rng)?;
    let split = TrainValidSplit::even(&synth.data)?;

    let outcome = select_hyperparameters(
        &candidates,
        &split,
        &z,
        1.0,
        &sel,
        &SelectionOptions::default(),
        &mut rng,
    )?;
    match &outcome.winner {
        Some(w) => {
            let c = &candidates[w.candidate_id];
            println!(
                "after {} draws the winner is candidate {}: lengthscale {:.3}, noise sd {:.3}",
                outcome.draws_used,
                w.candidate_id,
                c.spec.lengthscales()[0],
                c.noise.sd()
            );
            println!("private validation score: {:.2}", outcome.v_opt);
            println!("(the data were generated with lengthscale 1.0 and noise sd 0.1)");
        }
        None => println!("no draw passed the score guard; try a larger budget"),
    }
    Ok(())
}
