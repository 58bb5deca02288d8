//! Coordinate descent for the elastic net.
//!
//! Minimizes `(1/2n) ||y - Xw||^2 + lambda * (alpha ||w||_1 +
//! (1 - alpha)/2 ||w||_2^2)` by cycling through coordinates; each update is
//! an exact one-dimensional minimization, so the objective never increases,
//! converged or not.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The lasso shrinkage operator: `sign(z) * max(|z| - gamma, 0)`.
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Elastic-net objective `(1/2n)||y - Xw||^2 + lambda*(alpha*||w||_1 +
/// (1-alpha)/2*||w||_2^2)`.
pub fn elastic_net_objective(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let residual = y - x * w;
    let n = x.nrows() as f64;
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    let l2: f64 = w.iter().map(|v| v * v).sum();
    residual.norm_squared() / (2.0 * n) + lambda * (alpha * l1 + (1.0 - alpha) / 2.0 * l2)
}

/// A coordinate-descent solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CdSolution {
    pub weights: DVector<f64>,
    /// False when `max_sweeps` ran out before the largest coordinate
    /// change dropped to `tol`. The weights are still the best iterate.
    pub converged: bool,
    pub sweeps_run: usize,
}

/// Solve the elastic net by cyclic coordinate descent from a zero start.
pub fn elastic_net_cd(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    alpha: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<CdSolution> {
    let w0 = DVector::zeros(x.ncols());
    elastic_net_cd_from(x, y, w0, lambda, alpha, tol, max_sweeps)
}

/// Coordinate descent from an arbitrary start (used by ALS to warm-start
/// each entity's solve from its current factor vector).
pub(crate) fn elastic_net_cd_from(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    mut w: DVector<f64>,
    lambda: f64,
    alpha: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<CdSolution> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Data(format!(
            "design matrix must be non-empty, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.nrows() != y.len() {
        return Err(Error::Data(format!(
            "design has {} rows but target has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    if w.len() != x.ncols() {
        return Err(Error::Data("warm start length does not match the design".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be non-negative, got {lambda}")));
    }
    if !((0.0..=1.0).contains(&alpha) && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be in [0, 1], got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tol must be positive, got {tol}")));
    }

    let n = x.nrows() as f64;
    let d = x.ncols();
    // Mean squared column norms (1/n) x_j . x_j, fixed across sweeps.
    let col_sq: Vec<f64> = (0..d).map(|j| x.column(j).norm_squared() / n).collect();
    // Residual r = y - Xw, maintained incrementally.
    let mut residual = y - x * &w;

    let shrink = lambda * alpha;
    let ridge = lambda * (1.0 - alpha);
    let mut converged = false;
    let mut sweeps_run = 0;
    for _ in 0..max_sweeps {
        sweeps_run += 1;
        let mut max_delta: f64 = 0.0;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                // A zero column cannot affect the fit, so its coordinate
                // objective is pure penalty: minimized at 0 when the
                // penalty is active, indifferent otherwise. Never divides
                // by zero.
                if (shrink > 0.0 || ridge > 0.0) && w[j] != 0.0 {
                    max_delta = max_delta.max(w[j].abs());
                    w[j] = 0.0;
                }
                continue;
            }
            let old = w[j];
            // (1/n) x_j . r + col_sq_j * w_j reconstructs the partial
            // residual correlation without recomputing r from scratch.
            let rho = x.column(j).dot(&residual) / n + col_sq[j] * old;
            let new = soft_threshold(rho, shrink) / (col_sq[j] + ridge);
            if new != old {
                residual.axpy(old - new, &x.column(j), 1.0);
                w[j] = new;
                max_delta = max_delta.max((new - old).abs());
            }
        }
        if max_delta <= tol {
            converged = true;
            break;
        }
    }

    Ok(CdSolution {
        weights: w,
        converged,
        sweeps_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_design() -> (DMatrix<f64>, DVector<f64>) {
        // 5x2, well conditioned, hand-picked integers.
        let x = DMatrix::from_row_slice(5, 2, &[
            1.0, 0.0,
            2.0, 1.0,
            0.0, 3.0,
            -1.0, 1.0,
            1.0, -2.0,
        ]);
        let y = DVector::from_column_slice(&[1.0, 3.0, 2.0, 0.0, -1.0]);
        (x, y)
    }

    fn ols_reference(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
        let xtx = x.transpose() * x;
        let xty = x.transpose() * y;
        xtx.lu().solve(&xty).expect("nonsingular")
    }

    #[test]
    fn soft_threshold_known_values() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(1.0, 1.0), 0.0);
        assert_eq!(soft_threshold(-1.0, 1.0), 0.0);
        assert_eq!(soft_threshold(2.5, 0.0), 2.5);
    }

    #[test]
    fn zero_penalty_recovers_ols() {
        let (x, y) = small_design();
        let sol = elastic_net_cd(&x, &y, 0.0, 0.5, 1e-12, 10_000).unwrap();
        assert!(sol.converged);
        let ols = ols_reference(&x, &y);
        for j in 0..2 {
            assert!(
                (sol.weights[j] - ols[j]).abs() < 1e-8,
                "w[{j}] = {} vs OLS {}",
                sol.weights[j],
                ols[j]
            );
        }
    }

    #[test]
    fn pure_ridge_matches_the_closed_form() {
        let (x, y) = small_design();
        let lambda = 0.7;
        let sol = elastic_net_cd(&x, &y, lambda, 0.0, 1e-12, 10_000).unwrap();
        assert!(sol.converged);
        // alpha = 0 minimizer: (X^T X / n + lambda I)^{-1} X^T y / n.
        let n = x.nrows() as f64;
        let a = x.transpose() * &x / n + DMatrix::identity(2, 2) * lambda;
        let b = x.transpose() * &y / n;
        let closed = a.lu().solve(&b).unwrap();
        for j in 0..2 {
            assert!((sol.weights[j] - closed[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn univariate_problem_solves_in_one_exact_step() {
        // Single column: the coordinate update IS the closed form.
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_column_slice(&[2.0, 4.0, 5.0, 9.0]);
        let (lambda, alpha) = (0.5, 0.6);
        let n = 4.0;
        let rho = x.column(0).dot(&y) / n;
        let col_sq = x.column(0).norm_squared() / n;
        let expected = soft_threshold(rho, lambda * alpha) / (col_sq + lambda * (1.0 - alpha));
        let sol = elastic_net_cd(&x, &y, lambda, alpha, 1e-12, 100).unwrap();
        assert!(sol.converged);
        assert!((sol.weights[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn large_lasso_penalty_zeroes_everything() {
        let (x, y) = small_design();
        // The null solution is optimal once lambda >= max_j |(1/n) x_j . y|.
        let n = x.nrows() as f64;
        let lambda_max = (0..2)
            .map(|j| (x.column(j).dot(&y) / n).abs())
            .fold(0.0_f64, f64::max);
        let sol = elastic_net_cd(&x, &y, lambda_max * 1.001, 1.0, 1e-12, 100).unwrap();
        assert!(sol.weights.iter().all(|&w| w == 0.0));
        // Just below the threshold, at least one weight activates.
        let sol2 = elastic_net_cd(&x, &y, lambda_max * 0.99, 1.0, 1e-12, 10_000).unwrap();
        assert!(sol2.weights.iter().any(|&w| w != 0.0));
    }

    #[test]
    fn zero_columns_are_guarded() {
        let x = DMatrix::from_row_slice(3, 3, &[
            1.0, 0.0, 2.0,
            2.0, 0.0, 1.0,
            3.0, 0.0, -1.0,
        ]);
        let y = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let sol = elastic_net_cd(&x, &y, 0.1, 0.5, 1e-12, 1000).unwrap();
        assert_eq!(sol.weights[1], 0.0);
        assert!(sol.weights.iter().all(|w| w.is_finite()));
        // And with lambda = 0 / alpha = 1 the zero column would divide by
        // zero without the guard.
        let sol0 = elastic_net_cd(&x, &y, 0.0, 1.0, 1e-12, 1000).unwrap();
        assert_eq!(sol0.weights[1], 0.0);
        assert!(sol0.weights.iter().all(|w| w.is_finite()));
        // A warm start with weight on the zero column: the penalty alone
        // decides that coordinate, so it collapses to zero.
        let warm = DVector::from_column_slice(&[0.0, 7.0, 0.0]);
        let solw = elastic_net_cd_from(&x, &y, warm, 0.1, 0.5, 1e-12, 1000).unwrap();
        assert_eq!(solw.weights[1], 0.0);
    }

    #[test]
    fn objective_never_increases_sweep_over_sweep() {
        let (x, y) = small_design();
        let (lambda, alpha) = (0.3, 0.7);
        let mut previous = elastic_net_objective(&x, &y, &DVector::zeros(2), lambda, alpha);
        for sweeps in 1..=8 {
            let sol = elastic_net_cd(&x, &y, lambda, alpha, 1e-15, sweeps).unwrap();
            let objective = elastic_net_objective(&x, &y, &sol.weights, lambda, alpha);
            assert!(
                objective <= previous + 1e-12,
                "objective rose from {previous} to {objective} at sweep {sweeps}"
            );
            previous = objective;
        }
    }

    #[test]
    fn non_convergence_is_flagged_not_fatal() {
        // Strongly correlated columns converge slowly; one sweep is not
        // enough at this tolerance.
        let x = DMatrix::from_row_slice(4, 2, &[
            1.0, 0.99,
            1.0, 1.01,
            -1.0, -0.98,
            -1.0, -1.02,
        ]);
        let y = DVector::from_column_slice(&[1.0, 2.0, -1.5, -1.8]);
        let sol = elastic_net_cd(&x, &y, 0.001, 0.5, 1e-14, 1).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.sweeps_run, 1);
        assert!(sol.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn warm_start_reaches_the_same_solution() {
        let (x, y) = small_design();
        let cold = elastic_net_cd(&x, &y, 0.2, 0.5, 1e-13, 10_000).unwrap();
        let warm0 = DVector::from_column_slice(&[5.0, -3.0]);
        let warm = elastic_net_cd_from(&x, &y, warm0, 0.2, 0.5, 1e-13, 10_000).unwrap();
        for j in 0..2 {
            assert!((cold.weights[j] - warm.weights[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        let (x, y) = small_design();
        assert!(elastic_net_cd(&x, &y, -1.0, 0.5, 1e-8, 10).is_err());
        assert!(elastic_net_cd(&x, &y, 1.0, 1.5, 1e-8, 10).is_err());
        assert!(elastic_net_cd(&x, &y, 1.0, 0.5, 0.0, 10).is_err());
        let short_y = DVector::from_column_slice(&[1.0]);
        assert!(elastic_net_cd(&x, &short_y, 1.0, 0.5, 1e-8, 10).is_err());
    }
}
