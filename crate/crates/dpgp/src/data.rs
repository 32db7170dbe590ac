//! Regression datasets: synthetic generators and CSV round-tripping.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// A plain regression dataset with `n` rows of `p` input coordinates and one
/// output each.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    input_names: Vec<String>,
    output_name: String,
}

impl RegressionDataset {
    pub fn new(inputs: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        let p = inputs.first().map(|r| r.len()).unwrap_or(1);
        let input_names = (1..=p).map(|i| format!("x{i}")).collect();
        Self::with_names(inputs, outputs, input_names, "y".to_string())
    }

    pub fn with_names(
        inputs: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        input_names: Vec<String>,
        output_name: String,
    ) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                got: outputs.len(),
            });
        }
        let p = input_names.len();
        if inputs.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("all rows must share the input arity"));
        }
        if inputs.iter().flatten().any(|v| !v.is_finite())
            || outputs.iter().any(|v| !v.is_finite())
        {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(RegressionDataset {
            inputs,
            outputs,
            input_names,
            output_name,
        })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_names.len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_name(&self) -> &str {
        &self.output_name
    }

    /// Split into a first and second half (first half gets the extra row).
    pub fn split_half(&self) -> (RegressionDataset, RegressionDataset) {
        let cut = self.len().div_ceil(2);
        let first = RegressionDataset {
            inputs: self.inputs[..cut].to_vec(),
            outputs: self.outputs[..cut].to_vec(),
            input_names: self.input_names.clone(),
            output_name: self.output_name.clone(),
        };
        let second = RegressionDataset {
            inputs: self.inputs[cut..].to_vec(),
            outputs: self.outputs[cut..].to_vec(),
            input_names: self.input_names.clone(),
            output_name: self.output_name.clone(),
        };
        (first, second)
    }

    /// Dataset with a constant subtracted from every output.
    pub fn with_centered_outputs(&self, center: f64) -> RegressionDataset {
        RegressionDataset {
            inputs: self.inputs.clone(),
            outputs: self.outputs.iter().map(|y| y - center).collect(),
            input_names: self.input_names.clone(),
            output_name: self.output_name.clone(),
        }
    }
}

/// A synthetic dataset together with the noise-free function values at the
/// sampled inputs.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub data: RegressionDataset,
    pub latent: Vec<f64>,
}

/// The damped oscillation `sin(2x) / (2x)`, with the removable singularity
/// at zero filled in.
pub fn scaled_sinc(x: f64) -> f64 {
    let t = 2.0 * x;
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Uniform inputs on `[lo, hi]` with outputs `sin(2x)/(2x)` plus Gaussian
/// noise.
pub fn synth_sinc<R: Rng + ?Sized>(
    n: usize,
    noise_sd: f64,
    interval: (f64, f64),
    rng: &mut R,
) -> Result<SyntheticDataset> {
    if n == 0 {
        return Err(Error::EmptyInput("synthetic sample count"));
    }
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::invalid("interval must satisfy lo < hi"));
    }
    let mut inputs = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(lo..hi);
        let f = scaled_sinc(x);
        let z: f64 = StandardNormal.sample(rng);
        inputs.push(vec![x]);
        latent.push(f);
        outputs.push(f + noise_sd * z);
    }
    Ok(SyntheticDataset {
        data: RegressionDataset::new(inputs, outputs)?,
        latent,
    })
}

/// Uniform 1-d inputs with a function drawn from the kernel's Gaussian
/// process prior, plus observation noise. The prior draw factorizes the full
/// covariance; the jitter escalates by decades until the factorization
/// succeeds.
pub fn synth_gp_draw<R: Rng + ?Sized>(
    spec: &KernelSpec,
    n: usize,
    noise_sd: f64,
    interval: (f64, f64),
    rng: &mut R,
) -> Result<SyntheticDataset> {
    if n == 0 {
        return Err(Error::EmptyInput("synthetic sample count"));
    }
    if spec.input_dim() != 1 {
        return Err(Error::invalid("prior draws support 1-d inputs"));
    }
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::invalid("interval must satisfy lo < hi"));
    }
    let inputs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(lo..hi)]).collect();

    let mut k_xx = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        k_xx[(i, i)] = spec.variance();
        for j in (i + 1)..n {
            let v = spec.eval(&inputs[i], &inputs[j])?;
            k_xx[(i, j)] = v;
            k_xx[(j, i)] = v;
        }
    }

    let mut chol = None;
    let mut jitter = 1e-10 * spec.variance();
    for _ in 0..8 {
        let mut try_m = k_xx.clone();
        for i in 0..n {
            try_m[(i, i)] += jitter;
        }
        if let Some(c) = try_m.cholesky() {
            chol = Some(c);
            break;
        }
        jitter *= 10.0;
    }
    let chol = chol.ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: crate::linalg::min_symmetric_eigenvalue(&k_xx),
    })?;

    let white = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    let latent_vec = chol.l() * white;
    let latent: Vec<f64> = latent_vec.iter().copied().collect();
    let outputs: Vec<f64> = latent
        .iter()
        .map(|f| {
            let z: f64 = StandardNormal.sample(rng);
            f + noise_sd * z
        })
        .collect();

    Ok(SyntheticDataset {
        data: RegressionDataset::new(inputs, outputs)?,
        latent,
    })
}

/// Load a dataset from CSV. The header row names the columns; the last
/// column is the output, all preceding columns are inputs. An empty file
/// yields an empty dataset.
pub fn load_csv(path: impl AsRef<Path>) -> Result<RegressionDataset> {
    let file = std::fs::File::open(path.as_ref())?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        None => return RegressionDataset::new(vec![], vec![]),
        Some((_, line)) => line?,
    };
    if header.trim().is_empty() {
        return RegressionDataset::new(vec![], vec![]);
    }
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.len() < 2 {
        return Err(Error::Csv {
            line: 1,
            message: "need at least one input column and one output column".into(),
        });
    }
    let arity = names.len();
    let input_names = names[..arity - 1].to_vec();
    let output_name = names[arity - 1].clone();

    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != arity {
            return Err(Error::Csv {
                line: line_no,
                message: format!("expected {arity} fields, found {}", fields.len()),
            });
        }
        let mut row = Vec::with_capacity(arity - 1);
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Csv {
                line: line_no,
                message: format!("non-numeric value '{}' in column '{}'", field.trim(), names[col]),
            })?;
            if !value.is_finite() {
                return Err(Error::Csv {
                    line: line_no,
                    message: format!("non-finite value in column '{}'", names[col]),
                });
            }
            if col < arity - 1 {
                row.push(value);
            } else {
                outputs.push(value);
            }
        }
        inputs.push(row);
    }
    RegressionDataset::with_names(inputs, outputs, input_names, output_name)
}

/// Write a dataset as CSV with full float precision.
pub fn save_csv(dataset: &RegressionDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    let mut header = dataset.input_names().join(",");
    header.push(',');
    header.push_str(dataset.output_name());
    writeln!(w, "{header}")?;
    for (row, y) in dataset.inputs().iter().zip(dataset.outputs()) {
        for v in row {
            write!(w, "{v},")?;
        }
        writeln!(w, "{y}")?;
    }
    w.flush()?;
    Ok(())
}
