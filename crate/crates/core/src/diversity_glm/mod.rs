//! Regularized linear models and a latent-factor GLM trained by
//! alternating least squares.
//!
//! The regularization family covers elastic net (lasso/ridge blend, solved
//! by coordinate descent) and smoothed ℓp penalties for 0 < p ≤ 2 (solved
//! by iteratively reweighted ridge regressions). The ALS factorization
//! reuses those solvers per entity, which is what lets a single penalty
//! knob trade accuracy against recommendation diversity.

mod als;
mod cd;
mod irls;

pub use als::{train_als, GlmConfig, GlmExample, GlmModel, GlmScorer};
pub use cd::{elastic_net_cd, elastic_net_objective, soft_threshold, CdSolution};
pub use irls::{irls_lp, lp_objective, IrlsSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which penalty shapes the regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegMode {
    /// `lambda * (alpha * ||w||_1 + (1 - alpha) / 2 * ||w||_2^2)`.
    ElasticNet { alpha: f64 },
    /// `lambda * sum_j (w_j^2 + epsilon)^(p/2)`, the smoothed ℓp penalty.
    LpNorm { p: f64, epsilon: f64 },
}

/// A penalty strength plus its shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationSpec {
    pub lambda: f64,
    pub mode: RegMode,
}

impl RegularizationSpec {
    pub fn elastic_net(lambda: f64, alpha: f64) -> RegularizationSpec {
        RegularizationSpec {
            lambda,
            mode: RegMode::ElasticNet { alpha },
        }
    }

    pub fn lp_norm(lambda: f64, p: f64, epsilon: f64) -> RegularizationSpec {
        RegularizationSpec {
            lambda,
            mode: RegMode::LpNorm { p, epsilon },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        match self.mode {
            RegMode::ElasticNet { alpha } => {
                if !((0.0..=1.0).contains(&alpha) && alpha.is_finite()) {
                    return Err(Error::Config(format!("alpha must be in [0, 1], got {alpha}")));
                }
            }
            RegMode::LpNorm { p, epsilon } => {
                if !(p > 0.0 && p <= 2.0) {
                    return Err(Error::Config(format!("p must be in (0, 2], got {p}")));
                }
                if !(epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
                }
            }
        }
        Ok(())
    }
}
