//! Coordinate-descent solver for l1-penalized least squares at a fixed
//! penalty, pathwise fitting with warm starts, and KKT verification.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::model::{Dataset, LassoFit};

/// `sign(a) * max(|a| - lambda, 0)`.
#[inline]
pub fn soft_threshold(a: f64, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    if a > lambda {
        a - lambda
    } else if a < -lambda {
        a + lambda
    } else {
        0.0
    }
}

/// Smallest penalty at which the solution is identically zero:
/// `max_j |<y, x_j>| / n`.
pub fn lambda_max(data: &Dataset) -> f64 {
    let n = data.nrows() as f64;
    (0..data.ncols())
        .map(|j| (data.x.column(j).dot(&data.y) / n).abs())
        .fold(0.0, f64::max)
}

/// Strictly decreasing, log-equispaced penalty grid starting at `lambda_max`.
#[derive(Debug, Clone)]
pub struct LambdaGrid {
    pub values: Vec<f64>,
    pub ratio: f64,
}

impl LambdaGrid {
    pub fn new(lambda_max: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(lambda_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda_max must be positive, got {lambda_max}"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidConfig("grid count must be positive".into()));
        }
        if count > 1 && !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "grid ratio must lie in (0,1), got {ratio}"
            )));
        }
        let values = if count == 1 {
            vec![lambda_max]
        } else {
            (0..count)
                .map(|k| lambda_max * ratio.powf(k as f64 / (count - 1) as f64))
                .collect()
        };
        Ok(Self { values, ratio })
    }

    /// Conventional pathwise default: 100 values, ratio 0.01 when `p >= n`
    /// and 0.0001 otherwise.
    pub fn default_for(data: &Dataset) -> Result<Self> {
        let ratio = if data.ncols() >= data.nrows() {
            0.01
        } else {
            0.0001
        };
        Self::new(lambda_max(data), ratio, 100)
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }
}

/// One full coordinate pass in the given visiting order, maintaining the
/// residual incrementally. Returns `(sum |delta beta|, sum |beta before|)`.
pub(crate) fn sweep_once(
    data: &Dataset,
    beta: &mut [f64],
    r: &mut Array1<f64>,
    order: &[usize],
    lambda: f64,
) -> (f64, f64) {
    let n = data.nrows() as f64;
    let mut l1_change = 0.0;
    let mut l1_before = 0.0;
    for &j in order {
        let col = data.x.column(j);
        let old = beta[j];
        l1_before += old.abs();
        let new = soft_threshold(col.dot(r) / n + old, lambda);
        if new != old {
            r.scaled_add(old - new, &col);
            beta[j] = new;
            l1_change += (new - old).abs();
        }
    }
    (l1_change, l1_before)
}

/// Relative l1 change between sweeps, with the zero-start convention:
/// if the previous iterate was zero, the error is 0 when nothing moved and
/// infinite otherwise.
#[inline]
pub(crate) fn relative_change(l1_change: f64, l1_before: f64) -> f64 {
    if l1_before == 0.0 {
        if l1_change == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        l1_change / l1_before
    }
}

fn max_kkt_violation(data: &Dataset, beta: &[f64], r: &ArrayView1<f64>, lambda: f64) -> f64 {
    let n = data.nrows() as f64;
    let mut worst = f64::NEG_INFINITY;
    for j in 0..data.ncols() {
        let g = (data.x.column(j).dot(r) / n).abs();
        let v = if beta[j] != 0.0 {
            (g - lambda).abs()
        } else {
            g - lambda
        };
        worst = worst.max(v);
    }
    worst
}

/// Result of verifying the stationarity conditions of a candidate solution.
#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    pub pass: bool,
    pub max_violation: f64,
}

/// Check the optimality conditions at `lambda`: active coordinates must have
/// `|<x_j, r>/n| = lambda` and inactive ones `|<x_j, r>/n| <= lambda`, both
/// within `tol`. The residual is recomputed from `beta`.
pub fn kkt_check(data: &Dataset, beta: &[f64], lambda: f64, tol: f64) -> KktReport {
    let b = Array1::from_vec(beta.to_vec());
    let r = &data.y - &data.x.dot(&b);
    let max_violation = max_kkt_violation(data, beta, &r.view(), lambda);
    KktReport {
        pass: max_violation <= tol,
        max_violation,
    }
}

/// Solve the penalized problem at a fixed `lambda` by cyclic coordinate
/// descent from `beta_init`, visiting coordinates in `order`.
///
/// Stops once the relative l1 change of a sweep drops below `tol` and the
/// KKT violation is within `tol * lambda` (for `lambda = 0`, within
/// `tol * max_j |<x_j, y>|/n`). Exhausting `max_sweeps` returns the best
/// iterate with `converged = false` rather than an error.
pub fn cd_fixed_lambda(
    data: &Dataset,
    lambda: f64,
    beta_init: &[f64],
    order: &[usize],
    tol: f64,
    max_sweeps: usize,
) -> Result<LassoFit> {
    if lambda < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    let p = data.ncols();
    if beta_init.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "beta_init has {} entries for {} columns",
            beta_init.len(),
            p
        )));
    }
    if order.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "visiting order has {} entries for {} columns",
            order.len(),
            p
        )));
    }

    let mut beta = beta_init.to_vec();
    let b0 = Array1::from_vec(beta.clone());
    let mut r = &data.y - &data.x.dot(&b0);

    let kkt_target = if lambda > 0.0 {
        tol * lambda
    } else {
        tol * lambda_max(data)
    };

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        let (l1_change, l1_before) = sweep_once(data, &mut beta, &mut r, order, lambda);
        sweeps += 1;
        if relative_change(l1_change, l1_before) < tol {
            // Refresh the residual before judging optimality; incremental
            // updates drift.
            let b = Array1::from_vec(beta.clone());
            r = &data.y - &data.x.dot(&b);
            if max_kkt_violation(data, &beta, &r.view(), lambda) <= kkt_target {
                converged = true;
                break;
            }
        }
    }

    let b = Array1::from_vec(beta.clone());
    let residuals = (&data.y - &data.x.dot(&b)).to_vec();
    Ok(LassoFit {
        beta,
        lambda,
        residuals,
        sweeps,
        converged,
    })
}

/// Fit the whole grid with warm starts: the solution at each grid value
/// initializes the next.
pub fn lasso_path(
    data: &Dataset,
    grid: &LambdaGrid,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<LassoFit>> {
    let p = data.ncols();
    let order: Vec<usize> = (0..p).collect();
    let mut fits = Vec::with_capacity(grid.count());
    let mut warm = vec![0.0; p];
    for &lambda in &grid.values {
        let fit = cd_fixed_lambda(data, lambda, &warm, &order, tol, max_sweeps)?;
        warm = fit.beta.clone();
        fits.push(fit);
    }
    Ok(fits)
}

/// `(1/2n) ||y - X beta||^2 + lambda ||beta||_1`.
pub fn objective(data: &Dataset, beta: &[f64], lambda: f64) -> f64 {
    let b = Array1::from_vec(beta.to_vec());
    let r = &data.y - &data.x.dot(&b);
    let rss: f64 = r.iter().map(|v| v * v).sum();
    rss / (2.0 * data.nrows() as f64) + lambda * beta.iter().map(|v| v.abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::standardize;
    use ndarray::{array, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn toy_single_column() -> Dataset {
        Dataset::new(
            array![1.0, 2.0, 3.0, 4.0],
            array![[1.0], [1.0], [1.0], [1.0]],
        )
        .unwrap()
    }

    fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>() * 2.0 - 1.0);
        let y = Array1::from_shape_fn(n, |_| rng.gen::<f64>() * 2.0 - 1.0);
        Dataset::new(y, x).unwrap()
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(1.2, 0.5), 0.7);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(-1.2, 0.5), -0.7);
        for &x in &[-2.5, 0.0, 3.1] {
            assert_eq!(soft_threshold(x, 0.0), x);
        }
    }

    #[test]
    fn lambda_max_single_column() {
        // <Y, X> = 10, n = 4.
        assert_eq!(lambda_max(&toy_single_column()), 2.5);
    }

    #[test]
    fn lambda_max_orthogonal_response() {
        let data = Dataset::new(array![1.0, -1.0], array![[1.0], [1.0]]).unwrap();
        assert_eq!(lambda_max(&data), 0.0);
    }

    #[test]
    fn zero_fit_at_lambda_max_nonzero_below() {
        let raw = random_dataset(30, 8, 7);
        let (data, _) = standardize(&raw).unwrap();
        let lmax = lambda_max(&data);
        let order: Vec<usize> = (0..8).collect();
        let at = cd_fixed_lambda(&data, lmax, &vec![0.0; 8], &order, 1e-10, 1000).unwrap();
        assert!(at.beta.iter().all(|&b| b == 0.0));
        let below =
            cd_fixed_lambda(&data, 0.99 * lmax, &vec![0.0; 8], &order, 1e-10, 1000).unwrap();
        assert!(below.beta.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn single_coordinate_closed_form() {
        // p = 1: beta = S_lambda(<x, y>/n) since ||x||^2 = n.
        let data = toy_single_column();
        let fit = cd_fixed_lambda(&data, 0.5, &[0.0], &[0], 1e-12, 100).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-12);
        assert!(fit.converged);
    }

    #[test]
    fn grid_shape() {
        let grid = LambdaGrid::new(2.0, 0.01, 5).unwrap();
        assert_eq!(grid.values[0], 2.0);
        assert!((grid.values[4] - 0.02).abs() < 1e-12);
        for w in grid.values.windows(2) {
            assert!(w[1] < w[0]);
            assert!(w[1] > 0.0);
        }
        // Log-equispaced: constant consecutive ratio.
        let q = grid.values[1] / grid.values[0];
        for w in grid.values.windows(2) {
            assert!((w[1] / w[0] - q).abs() < 1e-12);
        }
        assert_eq!(LambdaGrid::new(2.0, 0.5, 1).unwrap().values, vec![2.0]);
        assert!(LambdaGrid::new(0.0, 0.5, 3).is_err());
    }

    #[test]
    fn path_warm_starts_match_cold_fits() {
        let raw = random_dataset(40, 12, 42);
        let (data, _) = standardize(&raw).unwrap();
        let grid = LambdaGrid::new(lambda_max(&data), 0.05, 12).unwrap();
        let fits = lasso_path(&data, &grid, 1e-9, 5000).unwrap();
        assert!(fits[0].beta.iter().all(|&b| b == 0.0));
        let order: Vec<usize> = (0..12).collect();
        for (fit, &lam) in fits.iter().zip(&grid.values) {
            let cold = cd_fixed_lambda(&data, lam, &vec![0.0; 12], &order, 1e-9, 5000).unwrap();
            for (a, b) in fit.beta.iter().zip(&cold.beta) {
                assert!((a - b).abs() < 1e-6, "lambda={lam}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn kkt_pass_and_perturbation_fail() {
        let raw = random_dataset(50, 10, 3);
        let (data, _) = standardize(&raw).unwrap();
        let lam = 0.4 * lambda_max(&data);
        let order: Vec<usize> = (0..10).collect();
        let fit = cd_fixed_lambda(&data, lam, &vec![0.0; 10], &order, 1e-8, 5000).unwrap();
        assert!(fit.converged);
        let report = kkt_check(&data, &fit.beta, lam, 1e-6);
        assert!(report.pass, "violation {}", report.max_violation);

        let mut bad = fit.beta.clone();
        let j = bad.iter().position(|&b| b != 0.0).unwrap();
        bad[j] += 0.1;
        assert!(!kkt_check(&data, &bad, lam, 1e-6).pass);

        // Zero vector at lambda >= lambda_max passes.
        assert!(kkt_check(&data, &vec![0.0; 10], lambda_max(&data), 1e-9).pass);
    }

    #[test]
    fn objective_non_increasing_per_sweep() {
        let raw = random_dataset(35, 20, 11);
        let (data, _) = standardize(&raw).unwrap();
        let lam = 0.1 * lambda_max(&data);
        let order: Vec<usize> = (0..20).collect();
        // Single-sweep continuations replay the solver's iterates exactly.
        let mut beta = vec![0.0; 20];
        let mut prev = objective(&data, &beta, lam);
        for _ in 0..25 {
            let fit = cd_fixed_lambda(&data, lam, &beta, &order, 0.0, 1).unwrap();
            beta = fit.beta;
            let cur = objective(&data, &beta, lam);
            assert!(cur <= prev + 1e-12 * (1.0 + prev.abs()));
            prev = cur;
        }
    }

    #[test]
    fn non_convergence_is_flagged() {
        let raw = random_dataset(25, 40, 5);
        let (data, _) = standardize(&raw).unwrap();
        let order: Vec<usize> = (0..40).collect();
        let fit = cd_fixed_lambda(
            &data,
            0.001 * lambda_max(&data),
            &vec![0.0; 40],
            &order,
            1e-14,
            2,
        )
        .unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.sweeps, 2);
    }

    #[test]
    fn residuals_recomputable() {
        let raw = random_dataset(30, 6, 9);
        let (data, _) = standardize(&raw).unwrap();
        let order: Vec<usize> = (0..6).collect();
        let fit =
            cd_fixed_lambda(&data, 0.2 * lambda_max(&data), &vec![0.0; 6], &order, 1e-9, 1000)
                .unwrap();
        let b = Array1::from_vec(fit.beta.clone());
        let fresh = &data.y - &data.x.dot(&b);
        for (a, b) in fit.residuals.iter().zip(fresh.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
