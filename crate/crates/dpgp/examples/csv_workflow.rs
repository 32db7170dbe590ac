//! End-to-end file workflow: synthesize a dataset, write it as CSV, load it
//! back, fit a private posterior and predict.
//!
//! ```bash
//! cargo run --release --example csv_workflow
//! ```

use dpgp::data::{load_csv, save_csv, synth_sinc};
use dpgp::dp::PrivacyBudget;
use dpgp::inference::{dp_gp_inference, DpGpOptions, NoiseModel};
use dpgp::kernels::{InducingSet, KernelSpec};
use dpgp::prediction::predict;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> dpgp::Result<()> {
    let dir = std::env::temp_dir().join("dpgp_csv_workflow");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("train.csv");

    let mut rng = StdRng::seed_from_u64(3);
    let synth = synth_sinc(512, 0.1, (-4.0, 4.0), &mut rng)?;
    save_csv(&synth.data, &path)?;
    println!("wrote {} rows to {}", synth.data.len(), path.display());

    let dataset = load_csv(&path)?;
    println!(
        "loaded {} rows, {} input column(s) [{}], output column '{}'",
        dataset.len(),
        dataset.input_dim(),
        dataset.input_names().join(", "),
        dataset.output_name()
    );

    let spec = KernelSpec::exponentiated_quadratic(1.0, 1.0, 1)?;
    let z = InducingSet::grid_1d(-3.0, 3.0, 9)?;
    let noise = NoiseModel::new(0.1)?;
    let budget = PrivacyBudget::new(3.0, 1e-4)?;
    let fit = dp_gp_inference(
        dataset.inputs(),
        dataset.outputs(),
        &z,
        &spec,
        &noise,
        1.0,
        &budget,
        &DpGpOptions::default(),
        &mut rng,
    )?;
    println!(
        "fitted under (3.0, 1e-4)-DP: kernel-norm bound {:.4}, noise scale {:.4}",
        fit.kernel_norm_bound, fit.scales.sigma_a
    );

    let queries = vec![vec![-2.0], vec![0.0], vec![2.0]];
    let pred = predict(&fit.posterior, &spec, &z, &queries, true)?;
    println!("{:>6} {:>10} {:>10}", "x", "mean", "sd");
    for (i, q) in queries.iter().enumerate() {
        println!(
            "{:>6} {:>10.4} {:>10.4}",
            q[0],
            pred.mean[i],
            pred.variances()[i].sqrt()
        );
    }
    Ok(())
}
