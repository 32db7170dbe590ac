//! End-to-end checks of the command-line driver and its file formats.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dpgp"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

#[test]
fn synth_then_infer_round_trip() {
    let dir = tempfile::tempdir().unwrap();

    let synth_cfg = write_config(
        dir.path(),
        "synth.json",
        r#"{"task": "synth", "seed": 9, "n_total": 64, "synth": "sinc"}"#,
    );
    let synth_out = dir.path().join("synth_out");
    let status = bin()
        .args(["synth", "--config"])
        .arg(&synth_cfg)
        .arg("--out")
        .arg(&synth_out)
        .status()
        .unwrap();
    assert!(status.success());
    let data_csv = synth_out.join("synth_data.csv");
    assert!(data_csv.exists());
    assert!(synth_out.join("synth_latent.csv").exists());
    assert!(synth_out.join("synth_config.json").exists());

    let infer_cfg = write_config(
        dir.path(),
        "infer.json",
        &format!(
            r#"{{"task": "infer", "seed": 1, "epsilons": [1.0, 10.0], "data_csv": {:?}, "prediction_points": 50}}"#,
            data_csv.to_str().unwrap()
        ),
    );
    let infer_out = dir.path().join("infer_out");
    let status = bin()
        .args(["infer", "--config"])
        .arg(&infer_cfg)
        .arg("--out")
        .arg(&infer_out)
        .status()
        .unwrap();
    assert!(status.success());

    let band = std::fs::read_to_string(infer_out.join("infer_band.csv")).unwrap();
    assert!(band.starts_with("epsilon,x,mean,sd\n"));
    assert_eq!(band.lines().count(), 1 + 2 * 50);
    let rmse = std::fs::read_to_string(infer_out.join("infer_rmse.csv")).unwrap();
    assert!(rmse.starts_with("epsilon,repeat,rmse\n"));
    assert!(infer_out.join("infer_inducing.csv").exists());
}

#[test]
fn identical_config_and_seed_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cal.json",
        r#"{"task": "calibrate", "seed": 4, "repeats": 3, "epsilons": [3.0],
            "noise_sds": [0.1], "alphas": [0.9], "n_total": 128, "output_bound": 3.0,
            "inducing": {"lo": [-3.5], "hi": [3.5], "counts": [15]}}"#,
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["calibrate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let f1 = std::fs::read(out1.join("calibrate_coverage.csv")).unwrap();
    let f2 = std::fs::read(out2.join("calibrate_coverage.csv")).unwrap();
    assert_eq!(f1, f2, "result files differ between identical runs");
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "synth.json",
        r#"{"task": "synth", "seed": 1, "n_total": 32}"#,
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let status = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .args(["--seed", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let f1 = std::fs::read(out1.join("synth_data.csv")).unwrap();
    let f2 = std::fs::read(out2.join("synth_data.csv")).unwrap();
    assert_ne!(f1, f2, "seed override had no effect");
}

#[test]
fn mismatched_subcommand_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "x.json", r#"{"task": "synth", "seed": 1}"#);
    let out = bin()
        .args(["infer", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("subcommand"), "stderr: {stderr}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"task": "synth", "seed": 1, "not_a_real_key": true}"#,
    );
    let out = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not_a_real_key"), "stderr: {stderr}");
}

#[test]
fn malformed_csv_input_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "x1,y\n0.5,0.25\noops,1.0\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "infer.json",
        &format!(
            r#"{{"task": "infer", "seed": 1, "epsilons": [1.0], "data_csv": {:?}}}"#,
            data.to_str().unwrap()
        ),
    );
    let out = bin()
        .args(["infer", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn hyperparams_frequencies_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "hp.json",
        r#"{"task": "hyperparams", "seed": 2, "repeats": 3, "epsilons": [30.0],
            "n_total": 256, "gamma": 0.3,
            "candidates": {"noise_sds": [0.1, 0.3], "lengthscales": [1.0]}}"#,
    );
    let out_dir = dir.path().join("out");
    let status = bin()
        .args(["hyperparams", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let table = std::fs::read_to_string(out_dir.join("hyperparams_frequency.csv")).unwrap();
    let mut total = 0.0;
    for line in table.lines().skip(1) {
        let freq: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        total += freq;
        assert!((0.0..=1.0).contains(&freq));
    }
    assert!((total - 1.0).abs() < 1e-9, "frequencies sum to {total}");
}
