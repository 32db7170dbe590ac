//! Thin command-line driver for the config-driven experiment runners.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dpgp::experiments::{run_task, ExperimentConfig, TaskKind};

#[derive(Parser)]
#[command(name = "dpgp", version, about = "Differentially private sparse GP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result CSVs and the config sidecar.
    #[arg(long)]
    out: PathBuf,
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the private posterior and dump predictive bands and RMSE tables.
    Infer(RunArgs),
    /// Coverage of noise-aware vs naive predictive intervals.
    Calibrate(RunArgs),
    /// Selection frequencies over a hyperparameter candidate grid.
    Hyperparams(RunArgs),
    /// Generate a synthetic dataset as CSV.
    Synth(RunArgs),
}

impl Command {
    fn task(&self) -> TaskKind {
        match self {
            Command::Infer(_) => TaskKind::Infer,
            Command::Calibrate(_) => TaskKind::Calibrate,
            Command::Hyperparams(_) => TaskKind::Hyperparams,
            Command::Synth(_) => TaskKind::Synth,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Infer(a) | Command::Calibrate(a) | Command::Hyperparams(a) | Command::Synth(a) => a,
        }
    }
}

fn run(cli: Cli) -> dpgp::Result<Vec<PathBuf>> {
    let task = cli.command.task();
    let args = cli.command.args();
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.task != task {
        return Err(dpgp::Error::Config(format!(
            "config task is '{}' but the '{}' subcommand was invoked",
            cfg.task, task
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    run_task(&cfg, &args.out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
