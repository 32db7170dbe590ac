//! Exponentiated-quadratic kernels, inducing-point sets and Gram matrices.
//!
//! Anisotropic lengthscales are handled by rescaling coordinates to
//! `x_n / l_n`, after which every supported kernel is isotropic with profile
//! `k_r(r) = exp(-r^2 / 2)` and value `k(x, x') = variance * k_r(r)` at
//! rescaled distance `r`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported kernel families. Both evaluate through the rescaled isotropic
/// path; the distinction is how lengthscales are declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// One shared lengthscale for every input dimension.
    ExponentiatedQuadratic,
    /// A product of per-dimension exponentiated quadratics.
    ProductExponentiatedQuadratic,
}

/// A stationary, decreasing kernel: function-value variance plus one positive
/// lengthscale per input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    variance: f64,
    lengthscales: Vec<f64>,
}

impl KernelSpec {
    /// Isotropic exponentiated quadratic over `dim` input dimensions.
    pub fn exponentiated_quadratic(variance: f64, lengthscale: f64, dim: usize) -> Result<Self> {
        Self::validated(
            KernelFamily::ExponentiatedQuadratic,
            variance,
            vec![lengthscale; dim.max(1)],
        )
    }

    /// Product of 1-d exponentiated quadratics with per-dimension lengthscales.
    pub fn product_exponentiated_quadratic(variance: f64, lengthscales: Vec<f64>) -> Result<Self> {
        Self::validated(
            KernelFamily::ProductExponentiatedQuadratic,
            variance,
            lengthscales,
        )
    }

    pub fn new(family: KernelFamily, variance: f64, lengthscales: Vec<f64>) -> Result<Self> {
        Self::validated(family, variance, lengthscales)
    }

    fn validated(family: KernelFamily, variance: f64, lengthscales: Vec<f64>) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::invalid(format!(
                "kernel variance must be positive and finite, got {variance}"
            )));
        }
        if lengthscales.is_empty() {
            return Err(Error::EmptyInput("kernel lengthscales"));
        }
        if lengthscales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid("every lengthscale must be positive and finite"));
        }
        if family == KernelFamily::ExponentiatedQuadratic
            && lengthscales.windows(2).any(|w| w[0] != w[1])
        {
            return Err(Error::invalid(
                "the exponentiated quadratic family uses one shared lengthscale",
            ));
        }
        Ok(KernelSpec {
            family,
            variance,
            lengthscales,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Function-value variance; also the maximum attainable kernel value.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn input_dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Diagonal shift used when a Gram matrix of this kernel has to be
    /// factorized but is numerically singular.
    pub fn jitter(&self) -> f64 {
        1e-8 * self.variance
    }

    /// Rescale a point to lengthscale units.
    pub fn rescale(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.lengthscales)
            .map(|(v, l)| v / l)
            .collect()
    }

    /// Distance between two points in rescaled coordinates.
    pub fn rescaled_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.lengthscales)
            .map(|((a, b), l)| {
                let d = (a - b) / l;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluate the kernel at two points of matching dimension.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let dim = self.input_dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if y.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: y.len(),
            });
        }
        let sq: f64 = x
            .iter()
            .zip(y)
            .zip(&self.lengthscales)
            .map(|((a, b), l)| {
                let d = (a - b) / l;
                d * d
            })
            .sum();
        Ok(self.variance * (-0.5 * sq).exp())
    }

    /// Squared normalized profile `k_r(r)^2` at rescaled distance `r`.
    ///
    /// `k_r(0) = 1` and the profile is non-increasing in `r`.
    pub fn profile_squared(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        (-r * r).exp()
    }
}

/// Regular axis-aligned grid: per-dimension point count, spacing and origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularGrid {
    pub counts: Vec<usize>,
    pub spacings: Vec<f64>,
    pub origins: Vec<f64>,
}

impl RegularGrid {
    pub fn new(counts: Vec<usize>, spacings: Vec<f64>, origins: Vec<f64>) -> Result<Self> {
        if counts.is_empty() || counts.len() != spacings.len() || counts.len() != origins.len() {
            return Err(Error::invalid("grid descriptor fields must share a dimension"));
        }
        if counts.contains(&0) {
            return Err(Error::invalid("grid counts must be positive"));
        }
        if spacings
            .iter()
            .zip(&counts)
            .any(|(s, &c)| c > 1 && !(*s > 0.0))
        {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        Ok(RegularGrid {
            counts,
            spacings,
            origins,
        })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn total_points(&self) -> usize {
        self.counts.iter().product()
    }

    /// All grid points in row-major order (last dimension varies fastest).
    pub fn enumerate_points(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let total = self.total_points();
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let p: Vec<f64> = (0..dim)
                .map(|k| self.origins[k] + idx[k] as f64 * self.spacings[k])
                .collect();
            points.push(p);
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < self.counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        points
    }

    /// Geometric center of the grid.
    pub fn center(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.origins[k] + 0.5 * (self.counts[k] - 1) as f64 * self.spacings[k])
            .collect()
    }

    pub fn all_counts_odd(&self) -> bool {
        self.counts.iter().all(|c| c % 2 == 1)
    }
}

/// A fixed set of inducing inputs, optionally laid out on a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InducingSet {
    points: Vec<Vec<f64>>,
    grid: Option<RegularGrid>,
    min_pairwise_distance: f64,
}

impl InducingSet {
    /// Build from explicit points. All points must be distinct and share a
    /// dimension; the minimum pairwise distance is computed here.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("inducing points"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("inducing point coordinates"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("inducing points must share a dimension"));
        }
        let min_pairwise_distance = min_pairwise(&points);
        if min_pairwise_distance <= 0.0 {
            return Err(Error::invalid("inducing points must be distinct"));
        }
        Ok(InducingSet {
            points,
            grid: None,
            min_pairwise_distance,
        })
    }

    /// Build from a regular-grid descriptor; the stored points are exactly
    /// the enumerated grid.
    pub fn from_grid(grid: RegularGrid) -> Result<Self> {
        let points = grid.enumerate_points();
        let mut set = Self::from_points(points)?;
        set.grid = Some(grid);
        Ok(set)
    }

    /// Evenly spaced 1-d grid with `count` points covering `[lo, hi]`.
    pub fn grid_1d(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyInput("inducing points"));
        }
        if count > 1 && !(hi > lo) {
            return Err(Error::invalid("grid interval must satisfy lo < hi"));
        }
        let spacing = if count > 1 {
            (hi - lo) / (count - 1) as f64
        } else {
            1.0
        };
        Self::from_grid(RegularGrid::new(vec![count], vec![spacing], vec![lo])?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn grid(&self) -> Option<&RegularGrid> {
        self.grid.as_ref()
    }

    /// Minimum pairwise distance in input units; infinite for a single point.
    pub fn min_pairwise_distance(&self) -> f64 {
        self.min_pairwise_distance
    }

    /// Points mapped to lengthscale-rescaled coordinates.
    pub fn rescaled_points(&self, spec: &KernelSpec) -> Result<Vec<Vec<f64>>> {
        self.check_dim(spec)?;
        Ok(self.points.iter().map(|p| spec.rescale(p)).collect())
    }

    /// Minimum pairwise distance after rescaling; infinite for a single point.
    pub fn min_rescaled_distance(&self, spec: &KernelSpec) -> Result<f64> {
        let rescaled = self.rescaled_points(spec)?;
        Ok(min_pairwise(&rescaled))
    }

    pub(crate) fn check_dim(&self, spec: &KernelSpec) -> Result<()> {
        if self.dim() != spec.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.input_dim(),
                got: self.dim(),
            });
        }
        Ok(())
    }
}

fn min_pairwise(points: &[Vec<f64>]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d < min {
                min = d;
            }
        }
    }
    min
}

/// Gram matrices of a kernel over inducing inputs and data inputs.
#[derive(Debug, Clone)]
pub struct KernelMatrices {
    /// `|Z| x |Z|` symmetric matrix of kernel values between inducing inputs.
    pub k_zz: DMatrix<f64>,
    /// `|Z| x n` matrix; column i holds kernel values between every inducing
    /// input and data point i.
    pub k_zx: DMatrix<f64>,
}

impl KernelMatrices {
    pub fn inducing_count(&self) -> usize {
        self.k_zz.nrows()
    }

    pub fn data_count(&self) -> usize {
        self.k_zx.ncols()
    }
}

/// Assemble `K_ZZ` and `K_ZX`. `K_ZZ` is computed once per unordered pair so
/// it is exactly symmetric.
pub fn gram_matrices(
    spec: &KernelSpec,
    z: &InducingSet,
    x: &[Vec<f64>],
) -> Result<KernelMatrices> {
    z.check_dim(spec)?;
    let d = z.len();
    let mut k_zz = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        k_zz[(i, i)] = spec.variance();
        for j in (i + 1)..d {
            let v = spec.eval(&z.points()[i], &z.points()[j])?;
            k_zz[(i, j)] = v;
            k_zz[(j, i)] = v;
        }
    }
    let n = x.len();
    let mut k_zx = DMatrix::<f64>::zeros(d, n);
    for (col, point) in x.iter().enumerate() {
        for row in 0..d {
            k_zx[(row, col)] = spec.eval(&z.points()[row], point)?;
        }
    }
    Ok(KernelMatrices { k_zz, k_zx })
}

/// Kernel values between one point and every inducing input.
pub fn kernel_vector(spec: &KernelSpec, z: &InducingSet, x: &[f64]) -> Result<Vec<f64>> {
    z.points()
        .iter()
        .map(|p| spec.eval(p, x))
        .collect::<Result<Vec<f64>>>()
}
