//! Iteratively reweighted least squares for smoothed ℓp penalties.
//!
//! Minimizes `(1/2n)||y - Xw||^2 + lambda * sum_j (w_j^2 + eps)^(p/2)` for
//! `0 < p <= 2` by majorize-minimize: each outer iteration solves the
//! weighted ridge system `(X^T X / n + lambda p diag(omega)) w = X^T y / n`
//! with `omega_j = (w_j^2 + eps)^((p-2)/2)` frozen at the current iterate.
//! At `p = 2` the weights are identically 1 and the very first solve is
//! already the fixed point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Diagonal jitter added when a normal-equations matrix fails to factor.
const JITTER: f64 = 1e-10;

/// Smoothed ℓp objective.
pub fn lp_objective(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    lambda: f64,
    p: f64,
    epsilon: f64,
) -> f64 {
    let residual = y - x * w;
    let n = x.nrows() as f64;
    let penalty: f64 = w.iter().map(|v| (v * v + epsilon).powf(p / 2.0)).sum();
    residual.norm_squared() / (2.0 * n) + lambda * penalty
}

/// An IRLS solution.
#[derive(Debug, Clone, PartialEq)]
pub struct IrlsSolution {
    pub weights: DVector<f64>,
    /// True when any solve needed diagonal jitter to factor.
    pub jitter_applied: bool,
}

/// Solve a reweighted-ridge system, falling back to jitter on the diagonal
/// when the unmodified matrix is not positive definite.
fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>, jittered: &mut bool) -> Result<DVector<f64>> {
    if let Some(chol) = a.clone().cholesky() {
        return Ok(chol.solve(b));
    }
    *jittered = true;
    let d = a.nrows();
    let jittered_a = a + DMatrix::identity(d, d) * JITTER;
    jittered_a
        .cholesky()
        .map(|chol| chol.solve(b))
        .ok_or_else(|| Error::Data("normal equations are singular even with jitter".into()))
}

/// Minimize the smoothed ℓp objective, starting from the ridge (`p = 2`)
/// solution of the same `lambda`.
pub fn irls_lp(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    p: f64,
    lambda: f64,
    epsilon: f64,
    outer_iterations: usize,
) -> Result<IrlsSolution> {
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
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::Config(format!("p must be in (0, 2], got {p}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be non-negative, got {lambda}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }

    let n = x.nrows() as f64;
    let d = x.ncols();
    let xtx_n = x.transpose() * x / n;
    let xty_n = x.transpose() * y / n;
    let mut jittered = false;

    // Ridge start: omega = 1, so the system is X^T X / n + 2 lambda I.
    let ridge = &xtx_n + DMatrix::identity(d, d) * (2.0 * lambda);
    let mut w = solve_spd(ridge, &xty_n, &mut jittered)?;

    for _ in 0..outer_iterations {
        let mut a = xtx_n.clone();
        for j in 0..d {
            let omega = (w[j] * w[j] + epsilon).powf((p - 2.0) / 2.0);
            a[(j, j)] += lambda * p * omega;
        }
        w = solve_spd(a, &xty_n, &mut jittered)?;
    }

    Ok(IrlsSolution {
        weights: w,
        jitter_applied: jittered,
    })
}
