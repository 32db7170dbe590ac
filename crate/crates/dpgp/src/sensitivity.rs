//! Upper bounds on the per-point kernel-vector norm and the joint mechanism
//! sensitivity derived from them.
//!
//! All distance arguments are in lengthscale-rescaled coordinates, matching
//! [`KernelSpec::profile_squared`].

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{InducingSet, KernelSpec};

/// Strategy for bounding the kernel-vector norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Trivial,
    OneDim,
    NDim,
    GridOptimal,
    /// Grid-optimal when the inducing set is an odd regular grid, otherwise
    /// the 1-d bound for scalar inputs and the n-d bound above that.
    Auto,
}

/// Resolved bounds feeding the joint sensitivity: `kernel_norm` bounds
/// `||k_i||_2`, `output_bound` bounds `|y_i|`.
#[derive(Debug, Clone, Copy)]
pub struct SensitivityBounds {
    pub kernel_norm: f64,
    pub output_bound: f64,
    pub method: BoundMethod,
}

impl SensitivityBounds {
    pub fn new(spec: &KernelSpec, z: &InducingSet, output_bound: f64, method: BoundMethod) -> Result<Self> {
        if !(output_bound > 0.0) {
            return Err(Error::invalid("output bound must be positive"));
        }
        let (kernel_norm, method) = kernel_norm_bound(spec, z, method)?;
        Ok(SensitivityBounds {
            kernel_norm,
            output_bound,
            method,
        })
    }
}

/// `sqrt(d) * variance`: valid for any kernel bounded by its variance.
pub fn bound_trivial(spec: &KernelSpec, d: usize) -> f64 {
    (d as f64).sqrt() * spec.variance()
}

/// 1-d bound from the minimum rescaled spacing `dz` between inducing points.
///
/// Counts at most two points in each spacing band around the data point, so
/// it can exceed the trivial bound for very small sets; callers clamp.
pub fn bound_1d(spec: &KernelSpec, d: usize, dz: f64) -> Result<f64> {
    if !(dz > 0.0) {
        return Err(Error::invalid(format!(
            "minimum spacing must be positive, got {dz}"
        )));
    }
    let half_floor = d / 2;
    let half_ceil = d.div_ceil(2);
    let mut sum = 0.0;
    for band in 0..=half_floor {
        sum += 2.0 * spec.profile_squared(band as f64 * dz);
    }
    sum += (half_ceil - half_floor) as f64 * spec.profile_squared(half_ceil as f64 * dz);
    Ok(spec.variance() * sum.sqrt())
}

/// n-d bound: at most one inducing point closer than `dz / 2` (rescaled).
pub fn bound_nd(spec: &KernelSpec, d: usize, dz: f64) -> Result<f64> {
    if !(dz > 0.0) {
        return Err(Error::invalid(format!(
            "minimum spacing must be positive, got {dz}"
        )));
    }
    let sum = 1.0 + (d as f64 - 1.0) * spec.profile_squared(dz / 2.0);
    Ok(spec.variance() * sum.sqrt())
}

/// Squared kernel-vector norm of an exponentiated-quadratic kernel over a
/// fixed inducing set, as a function of the rescaled query point:
/// `variance^2 * sum_j exp(-||x - z_j||^2)`.
#[derive(Debug, Clone)]
pub struct KernelNormSurface {
    rescaled_z: Vec<DVector<f64>>,
    variance_sq: f64,
    dim: usize,
}

impl KernelNormSurface {
    pub fn new(spec: &KernelSpec, z: &InducingSet) -> Result<Self> {
        let rescaled_z = z
            .rescaled_points(spec)?
            .into_iter()
            .map(DVector::from_vec)
            .collect();
        Ok(KernelNormSurface {
            rescaled_z,
            variance_sq: spec.variance() * spec.variance(),
            dim: z.dim(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.variance_sq
            * self
                .rescaled_z
                .iter()
                .map(|zj| (-(x - zj).norm_squared()).exp())
                .sum::<f64>()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for zj in &self.rescaled_z {
            let diff = x - zj;
            let w = (-diff.norm_squared()).exp();
            g.axpy(-2.0 * self.variance_sq * w, &diff, 1.0);
        }
        g
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        let eye = DMatrix::<f64>::identity(self.dim, self.dim);
        for zj in &self.rescaled_z {
            let diff = x - zj;
            let w = (-diff.norm_squared()).exp();
            let outer = &diff * diff.transpose();
            h += (outer * 2.0 - &eye) * (2.0 * self.variance_sq * w);
        }
        h
    }

    /// Axis-aligned bounding box of the rescaled inducing points.
    fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        let mut lo = self.rescaled_z[0].clone();
        let mut hi = self.rescaled_z[0].clone();
        for z in &self.rescaled_z {
            for k in 0..self.dim {
                lo[k] = lo[k].min(z[k]);
                hi[k] = hi[k].max(z[k]);
            }
        }
        (lo, hi)
    }

    /// Gradient ascent from `start` with an adaptive step; returns the best
    /// value reached.
    fn ascend(&self, start: DVector<f64>) -> f64 {
        let mut x = start;
        let mut value = self.value(&x);
        let mut step = 0.25;
        for _ in 0..500 {
            let g = self.gradient(&x);
            let gnorm = g.norm();
            if gnorm < 1e-14 * self.variance_sq {
                break;
            }
            let candidate = &x + &g * (step / gnorm.max(1e-300));
            let cand_value = self.value(&candidate);
            if cand_value > value {
                x = candidate;
                value = cand_value;
                step *= 1.5;
            } else {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        value
    }
}

/// Result of the grid-centered bound.
#[derive(Debug, Clone, Copy)]
pub struct GridOptimalBound {
    /// Kernel-norm bound: square root of the surface value at the grid center.
    pub kernel_norm: f64,
    /// Whether the Hessian at the center is negative definite; when false the
    /// center is not certified as a maximum and callers should fall back to
    /// the n-d bound.
    pub hessian_negative_definite: bool,
}

const MULTISTART_COUNT: usize = 20;
const MULTISTART_SEED: u64 = 0x9a9c_55d1;

/// Evaluate the squared kernel-norm surface at the rescaled grid center and
/// certify the center as its maximum.
///
/// Requires a regular grid with an odd point count per dimension and an
/// exponentiated-quadratic kernel. The gradient at the center must vanish and
/// a 20-start gradient ascent over the grid bounding box must not beat the
/// center value.
pub fn bound_grid_optimal(spec: &KernelSpec, z: &InducingSet) -> Result<GridOptimalBound> {
    let grid = z
        .grid()
        .ok_or_else(|| Error::invalid("grid-optimal bound needs regular-grid metadata"))?;
    if !grid.all_counts_odd() {
        return Err(Error::invalid(
            "grid-optimal bound needs an odd point count per dimension",
        ));
    }
    let surface = KernelNormSurface::new(spec, z)?;
    let center = DVector::from_vec(spec.rescale(&grid.center()));

    let center_value = surface.value(&center);
    let grad_norm = surface.gradient(&center).norm();
    if grad_norm > 1e-10 * surface.variance_sq.max(1.0) {
        return Err(Error::GridMaximum(format!(
            "gradient at grid center is {grad_norm:.3e}, expected 0"
        )));
    }

    let hessian = surface.hessian(&center);
    let max_eig = hessian.symmetric_eigen().eigenvalues.max();
    let hessian_negative_definite = max_eig < 0.0;

    if hessian_negative_definite {
        // Certify against local maxima elsewhere in the grid bounding box.
        let (lo, hi) = surface.bounding_box();
        let mut rng = StdRng::seed_from_u64(MULTISTART_SEED);
        for _ in 0..MULTISTART_COUNT {
            let start = DVector::from_fn(surface.dim(), |k, _| {
                if hi[k] > lo[k] {
                    rng.random_range(lo[k]..hi[k])
                } else {
                    lo[k]
                }
            });
            let reached = surface.ascend(start);
            if reached > center_value * (1.0 + 1e-9) {
                return Err(Error::GridMaximum(format!(
                    "ascent found {reached:.12e} above center value {center_value:.12e}"
                )));
            }
        }
    }

    Ok(GridOptimalBound {
        kernel_norm: center_value.sqrt(),
        hessian_negative_definite,
    })
}

/// Resolve a kernel-norm bound, clamping by the trivial bound which is always
/// valid. Returns the bound together with the method actually used.
pub fn kernel_norm_bound(
    spec: &KernelSpec,
    z: &InducingSet,
    method: BoundMethod,
) -> Result<(f64, BoundMethod)> {
    z.check_dim(spec)?;
    let d = z.len();
    let trivial = bound_trivial(spec, d);
    let fallback = |spec: &KernelSpec, z: &InducingSet| -> Result<(f64, BoundMethod)> {
        let dz = z.min_rescaled_distance(spec)?;
        if z.dim() == 1 {
            if dz.is_finite() {
                Ok((bound_1d(spec, d, dz)?, BoundMethod::OneDim))
            } else {
                // Single inducing point: the norm is exactly the variance.
                Ok((spec.variance(), BoundMethod::OneDim))
            }
        } else if dz.is_finite() {
            Ok((bound_nd(spec, d, dz)?, BoundMethod::NDim))
        } else {
            Ok((spec.variance(), BoundMethod::NDim))
        }
    };

    let (raw, resolved) = match method {
        BoundMethod::Trivial => (trivial, BoundMethod::Trivial),
        BoundMethod::OneDim => {
            if z.dim() != 1 {
                return Err(Error::invalid("the 1-d bound needs scalar inputs"));
            }
            let dz = z.min_rescaled_distance(spec)?;
            if dz.is_finite() {
                (bound_1d(spec, d, dz)?, BoundMethod::OneDim)
            } else {
                (spec.variance(), BoundMethod::OneDim)
            }
        }
        BoundMethod::NDim => {
            let dz = z.min_rescaled_distance(spec)?;
            if dz.is_finite() {
                (bound_nd(spec, d, dz)?, BoundMethod::NDim)
            } else {
                (spec.variance(), BoundMethod::NDim)
            }
        }
        BoundMethod::GridOptimal => {
            let bound = bound_grid_optimal(spec, z)?;
            if bound.hessian_negative_definite {
                (bound.kernel_norm, BoundMethod::GridOptimal)
            } else {
                fallback(spec, z)?
            }
        }
        BoundMethod::Auto => {
            // Take the tightest applicable bound.
            let mut best = (trivial, BoundMethod::Trivial);
            let dz = z.min_rescaled_distance(spec)?;
            if dz.is_finite() {
                if z.dim() == 1 {
                    let b = bound_1d(spec, d, dz)?;
                    if b < best.0 {
                        best = (b, BoundMethod::OneDim);
                    }
                }
                let b = bound_nd(spec, d, dz)?;
                if b < best.0 {
                    best = (b, BoundMethod::NDim);
                }
            } else if spec.variance() < best.0 {
                // Single inducing point: the norm is exactly the variance.
                best = (spec.variance(), BoundMethod::NDim);
            }
            let grid_ok = z.grid().map(|g| g.all_counts_odd()).unwrap_or(false);
            if grid_ok {
                let bound = bound_grid_optimal(spec, z)?;
                if bound.hessian_negative_definite && bound.kernel_norm < best.0 {
                    best = (bound.kernel_norm, BoundMethod::GridOptimal);
                }
            }
            best
        }
    };
    Ok((raw.min(trivial), resolved))
}

/// Joint sensitivity of releasing the two moment sums with noise ratio
/// `c = sigma_a / sigma_b`:
/// `sqrt(R_y^4 / (2 c^2) + 2 R_y^2 R_k^2 + 2 c^2 R_k^4)`.
pub fn joint_sensitivity(output_bound: f64, kernel_norm: f64, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(Error::invalid(format!(
            "noise ratio must be positive, got {ratio}"
        )));
    }
    let ry2 = output_bound * output_bound;
    let rk2 = kernel_norm * kernel_norm;
    let c2 = ratio * ratio;
    Ok((ry2 * ry2 / (2.0 * c2) + 2.0 * ry2 * rk2 + 2.0 * c2 * rk2 * rk2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    fn unit_eq(dim: usize) -> KernelSpec {
        KernelSpec::exponentiated_quadratic(1.0, 1.0, dim).unwrap()
    }

    #[test]
    fn trivial_bound_values() {
        assert_eq!(bound_trivial(&unit_eq(1), 1), 1.0);
        assert_eq!(bound_trivial(&unit_eq(1), 9), 3.0);
        let k2 = KernelSpec::exponentiated_quadratic(2.0, 1.0, 1).unwrap();
        assert_eq!(bound_trivial(&k2, 4), 4.0);
    }

    #[test]
    fn one_dim_bound_small_set() {
        // d = 1: half_floor = 0, half_ceil = 1.
        let k = unit_eq(1);
        let dz = 0.8;
        let expected = (2.0 + k.profile_squared(dz)).sqrt();
        assert!((bound_1d(&k, 1, dz).unwrap() - expected).abs() < 1e-14);
        // Looser than the trivial bound; the dispatcher clamps.
        let z = InducingSet::from_points(vec![vec![0.0]]).unwrap();
        let (clamped, _) = kernel_norm_bound(&k, &z, BoundMethod::Trivial).unwrap();
        assert!(clamped <= bound_trivial(&k, 1));
    }

    #[test]
    fn one_dim_bound_wide_spacing_limit() {
        let k = unit_eq(1);
        for d in [2usize, 4, 8] {
            let b = bound_1d(&k, d, 1e6).unwrap();
            assert!((b - 2f64.sqrt()).abs() < 1e-12, "d={d}: {b}");
        }
    }

    #[test]
    fn one_dim_bound_dominates_bruteforce() {
        // 9 inducing points on [-3, 3]; brute-force max of ||k_x|| over x.
        let k = unit_eq(1);
        let z = InducingSet::grid_1d(-3.0, 3.0, 9).unwrap();
        let bound = bound_1d(&k, 9, 0.75).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let mut max_norm: f64 = 0.0;
        for _ in 0..100_000 {
            let x = rng.random_range(-10.0..10.0);
            let sq: f64 = z
                .points()
                .iter()
                .map(|p| {
                    let v = k.eval(p, &[x]).unwrap();
                    v * v
                })
                .sum();
            max_norm = max_norm.max(sq.sqrt());
        }
        assert!(
            bound >= max_norm,
            "bound {bound} below empirical {max_norm}"
        );
    }

    #[test]
    fn one_dim_bound_rejects_bad_spacing() {
        assert!(bound_1d(&unit_eq(1), 3, 0.0).is_err());
        assert!(bound_1d(&unit_eq(1), 3, -1.0).is_err());
    }

    #[test]
    fn nd_bound_limits() {
        let k = unit_eq(2);
        // d = 1 collapses to the variance.
        assert!((bound_nd(&k, 1, 0.5).unwrap() - 1.0).abs() < 1e-14);
        // dz -> 0 recovers the trivial bound.
        assert!((bound_nd(&k, 9, 1e-12).unwrap() - 3.0).abs() < 1e-9);
        // dz -> infinity leaves only the closest point.
        assert!((bound_nd(&k, 9, 1e6).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nd_bound_dominates_dense_grid_oracle() {
        // 3x3 grid with anisotropic lengthscales.
        let k = KernelSpec::product_exponentiated_quadratic(2.2 * 2.2, vec![3.0, 3.5]).unwrap();
        let grid = crate::kernels::RegularGrid::new(
            vec![3, 3],
            vec![3.0, 7.0],
            vec![0.0, 2.0],
        )
        .unwrap();
        let z = InducingSet::from_grid(grid).unwrap();
        let dz = z.min_rescaled_distance(&k).unwrap();
        let bound = bound_nd(&k, 9, dz).unwrap();
        let mut max_norm: f64 = 0.0;
        for i in 0..120 {
            for j in 0..120 {
                let x = [-1.0 + 8.0 * i as f64 / 119.0, 0.0 + 18.0 * j as f64 / 119.0];
                let sq: f64 = z
                    .points()
                    .iter()
                    .map(|p| {
                        let v = k.eval(p, &x).unwrap();
                        v * v
                    })
                    .sum();
                max_norm = max_norm.max(sq.sqrt());
            }
        }
        assert!(bound >= max_norm, "bound {bound} below {max_norm}");
    }

    #[test]
    fn grid_optimal_single_point() {
        let k = KernelSpec::exponentiated_quadratic(2.5, 1.0, 1).unwrap();
        let grid = crate::kernels::RegularGrid::new(vec![1], vec![1.0], vec![0.3]).unwrap();
        let z = InducingSet::from_grid(grid).unwrap();
        let b = bound_grid_optimal(&k, &z).unwrap();
        assert!((b.kernel_norm - 2.5).abs() < 1e-12);
        assert!(b.hessian_negative_definite);
    }

    #[test]
    fn grid_optimal_rejects_even_counts() {
        let k = unit_eq(1);
        let z = InducingSet::grid_1d(-3.0, 3.0, 8).unwrap();
        assert!(bound_grid_optimal(&k, &z).is_err());
    }

    #[test]
    fn grid_optimal_requires_grid_metadata() {
        let k = unit_eq(1);
        let z = InducingSet::from_points(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(bound_grid_optimal(&k, &z).is_err());
    }

    #[test]
    fn grid_optimal_center_matches_direct_sum() {
        let k = unit_eq(1);
        let z = InducingSet::grid_1d(-3.0, 3.0, 9).unwrap();
        let b = bound_grid_optimal(&k, &z).unwrap();
        let direct: f64 = z
            .points()
            .iter()
            .map(|p| (-(p[0] * p[0])).exp())
            .sum::<f64>();
        assert!((b.kernel_norm - direct.sqrt()).abs() < 1e-12);
        assert!(b.hessian_negative_definite);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let k = KernelSpec::product_exponentiated_quadratic(1.3, vec![0.9, 1.4]).unwrap();
        let grid =
            crate::kernels::RegularGrid::new(vec![3, 3], vec![1.0, 1.2], vec![-1.0, -1.2]).unwrap();
        let z = InducingSet::from_grid(grid).unwrap();
        let surface = KernelNormSurface::new(&k, &z).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..100 {
            let x = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let g = surface.gradient(&x);
            let mut g_num = DVector::zeros(2);
            for kdim in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[kdim] += h;
                xm[kdim] -= h;
                g_num[kdim] = (surface.value(&xp) - surface.value(&xm)) / (2.0 * h);
            }
            let scale = g.norm().max(g_num.norm()).max(1e-8);
            assert!(
                (&g - &g_num).norm() / scale < 1e-6,
                "gradient mismatch at {x:?}: {g:?} vs {g_num:?}"
            );
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let k = unit_eq(2);
        let grid =
            crate::kernels::RegularGrid::new(vec![3, 3], vec![1.0, 1.0], vec![-1.0, -1.0]).unwrap();
        let z = InducingSet::from_grid(grid).unwrap();
        let surface = KernelNormSurface::new(&k, &z).unwrap();
        let mut rng = StdRng::seed_from_u64(6);
        let h = 1e-4;
        for _ in 0..10 {
            let x = DVector::from_fn(2, |_, _| rng.random_range(-1.5..1.5));
            let hess = surface.hessian(&x);
            let mut hess_num = DMatrix::zeros(2, 2);
            for a in 0..2 {
                for b in 0..2 {
                    let mut xpp = x.clone();
                    let mut xpm = x.clone();
                    let mut xmp = x.clone();
                    let mut xmm = x.clone();
                    xpp[a] += h;
                    xpp[b] += h;
                    xpm[a] += h;
                    xpm[b] -= h;
                    xmp[a] -= h;
                    xmp[b] += h;
                    xmm[a] -= h;
                    xmm[b] -= h;
                    hess_num[(a, b)] = (surface.value(&xpp) - surface.value(&xpm)
                        - surface.value(&xmp)
                        + surface.value(&xmm))
                        / (4.0 * h * h);
                }
            }
            let scale = hess.norm().max(hess_num.norm()).max(1e-8);
            assert!(
                (&hess - &hess_num).norm() / scale < 1e-5,
                "hessian mismatch at {x:?}"
            );
        }
    }

    #[test]
    fn grid_optimal_anisotropic_matches_dense_oracle() {
        // 3x3 grid, anisotropic lengthscales: the center value must dominate
        // a dense scan of the squared norm over the grid bounding box and be
        // attained near the center itself.
        let k = KernelSpec::product_exponentiated_quadratic(2.2 * 2.2, vec![3.0, 3.5]).unwrap();
        let grid =
            crate::kernels::RegularGrid::new(vec![3, 3], vec![3.0, 7.0], vec![0.0, 2.0]).unwrap();
        let z = InducingSet::from_grid(grid).unwrap();
        let b = bound_grid_optimal(&k, &z).unwrap();
        assert!(b.hessian_negative_definite);
        let center_sq = b.kernel_norm * b.kernel_norm;

        let mut dense_max: f64 = 0.0;
        for i in 0..200 {
            for j in 0..200 {
                let x = [6.0 * i as f64 / 199.0, 2.0 + 14.0 * j as f64 / 199.0];
                let sq: f64 = z
                    .points()
                    .iter()
                    .map(|p| {
                        let v = k.eval(p, &x).unwrap();
                        v * v
                    })
                    .sum();
                dense_max = dense_max.max(sq);
            }
        }
        assert!(center_sq >= dense_max, "{center_sq} vs {dense_max}");
        assert!(
            (center_sq - dense_max) / center_sq < 1e-3,
            "dense scan should come close to the center value"
        );
    }

    #[test]
    fn joint_sensitivity_values() {
        assert!((joint_sensitivity(0.0, 1.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((joint_sensitivity(1.0, 1.0, 1.0).unwrap() - 4.5f64.sqrt()).abs() < 1e-14);
        assert!(joint_sensitivity(1.0, 1.0, 0.0).is_err());
        assert!(joint_sensitivity(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn joint_sensitivity_dominates_neighbor_oracle() {
        // Monte-Carlo over pairs of per-point contributions with
        // ||k|| <= R_k, |y| <= R_y; the stacked difference norm must stay
        // below the joint sensitivity for the rescaled mechanism.
        let mut rng = StdRng::seed_from_u64(99);
        for _case in 0..5 {
            let r_k = rng.random_range(0.2..2.0);
            let r_y = rng.random_range(0.0..1.5);
            let c = rng.random_range(0.3..3.0);
            let delta = joint_sensitivity(r_y, r_k, c).unwrap();
            let d = 4usize;
            let mut worst: f64 = 0.0;
            for _ in 0..20_000 {
                let k1 = random_vec_in_ball(&mut rng, d, r_k);
                let k2 = random_vec_in_ball(&mut rng, d, r_k);
                let y1 = rng.random_range(-r_y..=r_y);
                let y2 = rng.random_range(-r_y..=r_y);
                let mut sq = 0.0;
                for i in 0..d {
                    let diff = y1 * k1[i] - y2 * k2[i];
                    sq += diff * diff;
                }
                // Flattened quadratic part scaled by c = sigma_a / sigma_b.
                for i in 0..d {
                    for j in i..d {
                        let w = if i == j { 1.0 } else { 2f64.sqrt() };
                        let diff = c * w * (k1[i] * k1[j] - k2[i] * k2[j]);
                        sq += diff * diff;
                    }
                }
                worst = worst.max(sq.sqrt());
            }
            assert!(
                worst <= delta * (1.0 + 1e-12),
                "oracle {worst} exceeded sensitivity {delta}"
            );
        }
    }

    fn random_vec_in_ball(rng: &mut StdRng, d: usize, radius: f64) -> Vec<f64> {
        // Uniform direction, radius biased toward the boundary to stress the bound.
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = radius * rng.random_range(0.5f64..1.0).sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x *= r / norm;
            }
        }
        v
    }

    #[test]
    fn dispatcher_clamps_and_falls_back() {
        let k = unit_eq(1);
        let z = InducingSet::grid_1d(-3.0, 3.0, 9).unwrap();
        let (auto, method) = kernel_norm_bound(&k, &z, BoundMethod::Auto).unwrap();
        assert_eq!(method, BoundMethod::GridOptimal);
        let (one_dim, _) = kernel_norm_bound(&k, &z, BoundMethod::OneDim).unwrap();
        let (trivial, _) = kernel_norm_bound(&k, &z, BoundMethod::Trivial).unwrap();
        assert!(auto <= one_dim);
        assert!(one_dim <= trivial);
        assert!(auto >= k.variance());

        // Even grid: auto falls back to the generic bound.
        let z_even = InducingSet::grid_1d(-3.0, 3.0, 8).unwrap();
        let (_, method) = kernel_norm_bound(&k, &z_even, BoundMethod::Auto).unwrap();
        assert_eq!(method, BoundMethod::OneDim);

        // Multi-dimensional non-grid: auto picks the n-d bound.
        let k2 = unit_eq(2);
        let z2 = InducingSet::from_points(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let (_, method) = kernel_norm_bound(&k2, &z2, BoundMethod::Auto).unwrap();
        assert_eq!(method, BoundMethod::NDim);
    }
}
