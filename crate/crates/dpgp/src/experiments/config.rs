//! JSON experiment configuration. Unknown keys are rejected so config typos
//! surface immediately.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{InducingSet, KernelFamily, KernelSpec, RegularGrid};
use crate::sensitivity::BoundMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Infer,
    Calibrate,
    Hyperparams,
    Synth,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TaskKind::Infer => "infer",
            TaskKind::Calibrate => "calibrate",
            TaskKind::Hyperparams => "hyperparams",
            TaskKind::Synth => "synth",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub variance: f64,
    pub lengthscales: Vec<f64>,
}

impl KernelConfig {
    pub fn to_spec(&self) -> Result<KernelSpec> {
        KernelSpec::new(self.family, self.variance, self.lengthscales.clone())
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            family: KernelFamily::ExponentiatedQuadratic,
            variance: 1.0,
            lengthscales: vec![1.0],
        }
    }
}

/// Regular inducing grid: per-dimension bounds and counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InducingGridConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl InducingGridConfig {
    pub fn to_inducing_set(&self) -> Result<InducingSet> {
        let dim = self.counts.len();
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(Error::Config(
                "inducing grid lo/hi/counts must share a dimension".into(),
            ));
        }
        let mut spacings = Vec::with_capacity(dim);
        for k in 0..dim {
            if self.counts[k] == 0 {
                return Err(Error::Config("inducing grid counts must be positive".into()));
            }
            if self.counts[k] > 1 && !(self.hi[k] > self.lo[k]) {
                return Err(Error::Config("inducing grid needs lo < hi".into()));
            }
            let s = if self.counts[k] > 1 {
                (self.hi[k] - self.lo[k]) / (self.counts[k] - 1) as f64
            } else {
                1.0
            };
            spacings.push(s);
        }
        InducingSet::from_grid(RegularGrid::new(
            self.counts.clone(),
            spacings,
            self.lo.clone(),
        )?)
    }
}

impl Default for InducingGridConfig {
    fn default() -> Self {
        InducingGridConfig {
            lo: vec![-3.0],
            hi: vec![3.0],
            counts: vec![9],
        }
    }
}

/// Cross product of candidate noise levels and lengthscales.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateGridConfig {
    pub noise_sds: Vec<f64>,
    pub lengthscales: Vec<f64>,
}

impl Default for CandidateGridConfig {
    fn default() -> Self {
        CandidateGridConfig {
            noise_sds: vec![0.1 / 3.0, 0.1, 0.3],
            lengthscales: vec![1.0 / 3.0, 1.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Sinc,
    GpDraw,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub epsilon: f64,
    pub delta: f64,
}

fn default_repeats() -> usize {
    1
}

fn default_delta() -> f64 {
    1e-4
}

fn default_noise_sd() -> f64 {
    0.1
}

fn default_n_total() -> usize {
    1024
}

fn default_interval() -> (f64, f64) {
    (-4.0, 4.0)
}

fn default_output_bound() -> f64 {
    1.0
}

fn default_noise_ratio() -> f64 {
    1.0
}

fn default_rho_pd() -> f64 {
    0.01
}

fn default_bound_method() -> BoundMethod {
    BoundMethod::Auto
}

fn default_gamma() -> f64 {
    0.01
}

fn default_prediction_points() -> usize {
    200
}

/// One experiment run, fully resolved. Serialized alongside results so a run
/// can be reproduced from its output directory alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Privacy levels; the total budget for hyperparameter runs.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub kernel: KernelConfig,
    /// True/model observation noise for synthetic tasks.
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    /// Per-scenario observation noise levels for the calibration task.
    #[serde(default)]
    pub noise_sds: Vec<f64>,
    #[serde(default)]
    pub inducing: InducingGridConfig,
    /// Coverage levels for the calibration task.
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default = "default_n_total")]
    pub n_total: usize,
    #[serde(default = "default_interval")]
    pub interval: (f64, f64),
    #[serde(default = "default_output_bound")]
    pub output_bound: f64,
    #[serde(default = "default_noise_ratio")]
    pub noise_ratio: f64,
    #[serde(default = "default_rho_pd")]
    pub rho_pd: f64,
    #[serde(default = "default_bound_method")]
    pub bound_method: BoundMethod,
    #[serde(default)]
    pub candidates: Option<CandidateGridConfig>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Input data for the infer task; synthetic data is generated when unset.
    #[serde(default)]
    pub data_csv: Option<String>,
    #[serde(default)]
    pub synth: Option<SynthKind>,
    /// Add a non-private reference fit to the inference demo output.
    #[serde(default)]
    pub include_non_private: bool,
    #[serde(default = "default_prediction_points")]
    pub prediction_points: usize,
    /// Optional budget for privately centering outputs before inference.
    #[serde(default)]
    pub prior_mean_budget: Option<BudgetConfig>,
}

impl ExperimentConfig {
    /// A minimal valid config for the given task; tests and demos tweak it.
    pub fn for_task(task: TaskKind, seed: u64) -> Self {
        ExperimentConfig {
            task,
            seed,
            repeats: default_repeats(),
            epsilons: vec![1.0],
            delta: default_delta(),
            kernel: KernelConfig::default(),
            noise_sd: default_noise_sd(),
            noise_sds: vec![],
            inducing: InducingGridConfig::default(),
            alphas: vec![],
            n_total: default_n_total(),
            interval: default_interval(),
            output_bound: default_output_bound(),
            noise_ratio: default_noise_ratio(),
            rho_pd: default_rho_pd(),
            bound_method: default_bound_method(),
            candidates: None,
            gamma: default_gamma(),
            data_csv: None,
            synth: None,
            include_non_private: false,
            prediction_points: default_prediction_points(),
            prior_mean_budget: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("every epsilon must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must lie in (0, 1)".into()));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::Config("every alpha must lie in (0, 1)".into()));
        }
        if !(self.output_bound > 0.0) {
            return Err(Error::Config("output_bound must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("gamma must lie in (0, 1)".into()));
        }
        if !(self.noise_sd > 0.0) {
            return Err(Error::Config("noise_sd must be positive".into()));
        }
        self.kernel.to_spec()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path.as_ref(), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let json = r#"{"task": "infer", "seed": 1, "bogus_key": 3}"#;
        let err = serde_json::from_str::<ExperimentConfig>(json).unwrap_err();
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn minimal_config_parses() {
        let json = r#"{"task": "infer", "seed": 7, "epsilons": [1.0, 3.0]}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.task, TaskKind::Infer);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.epsilons, vec![1.0, 3.0]);
        assert_eq!(cfg.n_total, 1024);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut cfg = ExperimentConfig::for_task(TaskKind::Infer, 0);
        cfg.epsilons = vec![-1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::for_task(TaskKind::Calibrate, 0);
        cfg.alphas = vec![1.5];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::for_task(TaskKind::Synth, 0);
        cfg.repeats = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn inducing_grid_materializes() {
        let g = InducingGridConfig {
            lo: vec![-3.0],
            hi: vec![3.0],
            counts: vec![9],
        };
        let z = g.to_inducing_set().unwrap();
        assert_eq!(z.len(), 9);
        assert!((z.min_pairwise_distance() - 0.75).abs() < 1e-12);

        let g2 = InducingGridConfig {
            lo: vec![0.0, 2.0],
            hi: vec![6.0, 16.0],
            counts: vec![3, 3],
        };
        let z2 = g2.to_inducing_set().unwrap();
        assert_eq!(z2.len(), 9);
        assert_eq!(z2.dim(), 2);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig::for_task(TaskKind::Hyperparams, 11);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.seed, 11);
        assert_eq!(back.task, TaskKind::Hyperparams);
    }
}
