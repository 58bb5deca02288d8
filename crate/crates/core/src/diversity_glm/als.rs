//! Alternating minimization for the penalized factorization model.
//!
//! Training has two phases. Intercepts come first and in closed form: a
//! global mean, then damped user and item offsets whose denominators are
//! inflated by `damping` so rarely-seen entities shrink toward zero.
//! Factors are then fit by block coordinate descent over entities: each
//! user's factor vector is the solution of a small penalized regression
//! whose design rows are the factors of the items that user touched, and
//! the item half-sweep is symmetric.
//!
//! The global objective is
//!
//! ```text
//! F(P, Q) = (1/2N) Σ e_ui²
//!         + (λ/N) (Σ_u n_u · pen(p_u) + Σ_i n_i · pen(q_i))
//! ```
//!
//! where `N` counts observations, `n_u`/`n_i` count observations per
//! entity, and `pen` is the configured penalty. The `n_u` weighting makes
//! each entity's subproblem exactly the objective that
//! [`elastic_net_cd`](super::elastic_net_cd) minimizes with the *same*
//! `lambda` and `alpha`; because those solves are warm-started from the
//! current factor vector and coordinate descent never increases its own
//! objective, every elastic-net half-sweep leaves `F` no larger. The
//! smoothed-ℓp solver restarts from a fresh ridge solution instead, so its
//! trace is informative but not guaranteed monotone.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::cd::elastic_net_cd_from;
use super::irls::irls_lp;
use super::{RegMode, RegularizationSpec};
use crate::corpus::Interaction;
use crate::error::{Error, Result};
use crate::intern::Interner;
use crate::scorer::ItemScorer;

/// Hyper-parameters for [`train_als`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmConfig {
    /// Latent dimensions; 0 trains an intercepts-only model.
    pub n_factors: usize,
    /// Penalty applied to every per-entity factor solve.
    pub regularization: RegularizationSpec,
    /// Full user-then-item alternation rounds.
    pub outer_sweeps: usize,
    /// Stopping threshold for one coordinate-descent entity solve.
    pub inner_tol: f64,
    /// Sweep budget for one coordinate-descent entity solve.
    pub inner_max_sweeps: usize,
    /// Reweighting iterations for one smoothed-ℓp entity solve.
    pub irls_iterations: usize,
    /// Factor init: Normal(0, init_scale / sqrt(n_factors)).
    pub init_scale: f64,
    /// Added to the observation count in the intercept denominators.
    pub damping: f64,
    /// Rating scale for clamped predictions; `None` (implicit targets)
    /// disables clamping and rating semantics.
    pub rating_bounds: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for GlmConfig {
    fn default() -> Self {
        GlmConfig {
            n_factors: 16,
            regularization: RegularizationSpec::elastic_net(0.1, 0.5),
            outer_sweeps: 15,
            inner_tol: 1e-8,
            inner_max_sweeps: 500,
            irls_iterations: 25,
            init_scale: 0.1,
            damping: 10.0,
            rating_bounds: Some((1.0, 5.0)),
            seed: 0,
        }
    }
}

impl GlmConfig {
    pub fn validate(&self) -> Result<()> {
        self.regularization.validate()?;
        if !(self.inner_tol > 0.0 && self.inner_tol.is_finite()) {
            return Err(Error::Config(format!(
                "inner_tol must be positive, got {}",
                self.inner_tol
            )));
        }
        if self.inner_max_sweeps == 0 {
            return Err(Error::Config("inner_max_sweeps must be at least 1".into()));
        }
        if self.irls_iterations == 0 {
            return Err(Error::Config("irls_iterations must be at least 1".into()));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config(format!(
                "init_scale must be positive, got {}",
                self.init_scale
            )));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::Config(format!("damping must be non-negative, got {}", self.damping)));
        }
        if let Some((lo, hi)) = self.rating_bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("invalid rating bounds ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// One (user, item, target) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmExample {
    pub user_id: String,
    pub item_id: String,
    pub target: f64,
}

impl GlmExample {
    /// Keep explicit ratings as targets; clicks carry no value and are
    /// skipped.
    pub fn from_ratings(interactions: &[Interaction]) -> Vec<GlmExample> {
        interactions
            .iter()
            .filter_map(|inter| {
                inter.feedback.rating().map(|value| GlmExample {
                    user_id: inter.user_id.clone(),
                    item_id: inter.item_id.clone(),
                    target: value,
                })
            })
            .collect()
    }
}

/// Factorization model with damped intercepts and penalized factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlmModel {
    pub config: GlmConfig,
    /// Global mean target.
    pub mu: f64,
    /// User ids in training (first-seen) order; rows of `p` align to this.
    pub users: Vec<String>,
    /// Item ids in training (first-seen) order; rows of `q` align to this.
    pub items: Vec<String>,
    pub b_u: Vec<f64>,
    pub b_i: Vec<f64>,
    /// User factors, row-major `users.len() x n_factors`.
    pub p: Vec<f64>,
    /// Item factors, row-major `items.len() x n_factors`.
    pub q: Vec<f64>,
    /// Global objective at initialization, then after every user and every
    /// item half-sweep.
    pub objective_trace: Vec<f64>,
    /// Entity solves that exhausted `inner_max_sweeps` before the largest
    /// coordinate step dropped to `inner_tol`.
    pub unconverged_inner_solves: u64,
    #[serde(skip)]
    user_idx: HashMap<String, usize>,
    #[serde(skip)]
    item_idx: HashMap<String, usize>,
}

impl GlmModel {
    pub(crate) fn reindex(&mut self) {
        self.user_idx = self.users.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
        self.item_idx = self.items.iter().enumerate().map(|(i, it)| (it.clone(), i)).collect();
    }

    /// Unclamped prediction. Unknown users and items contribute nothing
    /// beyond the terms that are known, so a fully cold pair scores `mu`.
    pub fn predict_raw(&self, user_id: &str, item_id: &str) -> f64 {
        let user = self.user_idx.get(user_id).copied();
        let item = self.item_idx.get(item_id).copied();
        let mut pred = self.mu;
        if let Some(u) = user {
            pred += self.b_u[u];
        }
        if let Some(i) = item {
            pred += self.b_i[i];
        }
        if let (Some(u), Some(i)) = (user, item) {
            let k = self.config.n_factors;
            let pu = &self.p[u * k..(u + 1) * k];
            let qi = &self.q[i * k..(i + 1) * k];
            pred += pu.iter().zip(qi).map(|(a, b)| a * b).sum::<f64>();
        }
        pred
    }

    /// Prediction clamped to `rating_bounds` when they are configured.
    pub fn predict(&self, user_id: &str, item_id: &str) -> f64 {
        let raw = self.predict_raw(user_id, item_id);
        match self.config.rating_bounds {
            Some((lo, hi)) => raw.clamp(lo, hi),
            None => raw,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<GlmModel> {
        let mut model: GlmModel = serde_json::from_str(text)?;
        model.reindex();
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GlmModel> {
        GlmModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// [`ItemScorer`] adapter. The model has no time component, so the
/// timestamp is ignored.
pub struct GlmScorer<'a> {
    pub model: &'a GlmModel,
}

impl ItemScorer for GlmScorer<'_> {
    fn score(&self, user_id: &str, item_id: &str, _timestamp: i64) -> f64 {
        self.model.predict(user_id, item_id)
    }

    fn predicts_ratings(&self) -> bool {
        self.model.config.rating_bounds.is_some()
    }
}

/// Per-entity penalty value (the objective multiplies this by `lambda`
/// and the entity's observation count).
fn penalty_value(w: &[f64], spec: &RegularizationSpec) -> f64 {
    match spec.mode {
        RegMode::ElasticNet { alpha } => {
            let l1: f64 = w.iter().map(|v| v.abs()).sum();
            let l2: f64 = w.iter().map(|v| v * v).sum();
            alpha * l1 + (1.0 - alpha) / 2.0 * l2
        }
        RegMode::LpNorm { p, epsilon } => {
            w.iter().map(|v| (v * v + epsilon).powf(p / 2.0)).sum()
        }
    }
}

/// Solve one entity's penalized regression. `rows` pairs the index of each
/// counterpart entity with the residual target; `other` holds the fixed
/// side's factors, row-major with stride `k`.
fn solve_entity(
    rows: &[(usize, f64)],
    other: &[f64],
    warm: &[f64],
    k: usize,
    spec: &RegularizationSpec,
    config: &GlmConfig,
    unconverged: &mut u64,
) -> Result<DVector<f64>> {
    let x = DMatrix::from_fn(rows.len(), k, |r, c| other[rows[r].0 * k + c]);
    let y = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    match spec.mode {
        RegMode::ElasticNet { alpha } => {
            let start = DVector::from_column_slice(warm);
            let sol = elastic_net_cd_from(
                &x,
                &y,
                start,
                spec.lambda,
                alpha,
                config.inner_tol,
                config.inner_max_sweeps,
            )?;
            if !sol.converged {
                *unconverged += 1;
            }
            Ok(sol.weights)
        }
        RegMode::LpNorm { p, epsilon } => {
            Ok(irls_lp(&x, &y, p, spec.lambda, epsilon, config.irls_iterations)?.weights)
        }
    }
}

/// Train by closed-form damped intercepts followed by alternating
/// penalized entity solves.
pub fn train_als(config: &GlmConfig, examples: &[GlmExample]) -> Result<GlmModel> {
    config.validate()?;
    if examples.is_empty() {
        return Err(Error::Data("cannot train on zero examples".into()));
    }

    let mut users = Interner::new();
    let mut items = Interner::new();
    let mut resolved = Vec::with_capacity(examples.len());
    for ex in examples {
        if !ex.target.is_finite() {
            return Err(Error::Data(format!(
                "non-finite target {} for user {} item {}",
                ex.target, ex.user_id, ex.item_id
            )));
        }
        resolved.push((users.intern(&ex.user_id), items.intern(&ex.item_id), ex.target));
    }
    let n_users = users.names.len();
    let n_items = items.names.len();
    let n = resolved.len() as f64;
    let mu = resolved.iter().map(|&(_, _, t)| t).sum::<f64>() / n;

    let mut by_user: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_users];
    let mut by_item: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_items];
    for &(u, i, t) in &resolved {
        by_user[u].push((i, t));
        by_item[i].push((u, t));
    }

    let damping = config.damping;
    let b_u: Vec<f64> = by_user
        .iter()
        .map(|obs| {
            obs.iter().map(|&(_, t)| t - mu).sum::<f64>() / (obs.len() as f64 + damping)
        })
        .collect();
    let b_i: Vec<f64> = by_item
        .iter()
        .map(|obs| {
            obs.iter().map(|&(u, t)| t - mu - b_u[u]).sum::<f64>() / (obs.len() as f64 + damping)
        })
        .collect();

    // Residual targets for the factor phase, grouped by each side.
    let user_rows: Vec<Vec<(usize, f64)>> = by_user
        .iter()
        .enumerate()
        .map(|(u, obs)| {
            obs.iter().map(|&(i, t)| (i, t - mu - b_u[u] - b_i[i])).collect()
        })
        .collect();
    let item_rows: Vec<Vec<(usize, f64)>> = by_item
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            obs.iter().map(|&(u, t)| (u, t - mu - b_u[u] - b_i[i])).collect()
        })
        .collect();

    let k = config.n_factors;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut p, mut q) = if k > 0 {
        let normal = Normal::new(0.0, config.init_scale / (k as f64).sqrt())
            .expect("positive init scale");
        let p: Vec<f64> = (0..n_users * k).map(|_| normal.sample(&mut rng)).collect();
        let q: Vec<f64> = (0..n_items * k).map(|_| normal.sample(&mut rng)).collect();
        (p, q)
    } else {
        (Vec::new(), Vec::new())
    };

    let spec = &config.regularization;
    let objective = |p: &[f64], q: &[f64]| -> f64 {
        let mut sse = 0.0;
        for (u, rows) in user_rows.iter().enumerate() {
            for &(i, t) in rows {
                let pu = &p[u * k..(u + 1) * k];
                let qi = &q[i * k..(i + 1) * k];
                let e = t - pu.iter().zip(qi).map(|(a, b)| a * b).sum::<f64>();
                sse += e * e;
            }
        }
        let mut penalty = 0.0;
        for (u, rows) in user_rows.iter().enumerate() {
            penalty += rows.len() as f64 * penalty_value(&p[u * k..(u + 1) * k], spec);
        }
        for (i, rows) in item_rows.iter().enumerate() {
            penalty += rows.len() as f64 * penalty_value(&q[i * k..(i + 1) * k], spec);
        }
        sse / (2.0 * n) + spec.lambda * penalty / n
    };

    let mut objective_trace = Vec::with_capacity(1 + 2 * config.outer_sweeps);
    objective_trace.push(objective(&p, &q));
    let mut unconverged: u64 = 0;

    if k > 0 {
        for _ in 0..config.outer_sweeps {
            for (u, rows) in user_rows.iter().enumerate() {
                let solved =
                    solve_entity(rows, &q, &p[u * k..(u + 1) * k], k, spec, config, &mut unconverged)?;
                p[u * k..(u + 1) * k].copy_from_slice(solved.as_slice());
            }
            objective_trace.push(objective(&p, &q));
            for (i, rows) in item_rows.iter().enumerate() {
                let solved =
                    solve_entity(rows, &p, &q[i * k..(i + 1) * k], k, spec, config, &mut unconverged)?;
                q[i * k..(i + 1) * k].copy_from_slice(solved.as_slice());
            }
            objective_trace.push(objective(&p, &q));
        }
    }

    let mut model = GlmModel {
        config: config.clone(),
        mu,
        users: users.names,
        items: items.names,
        b_u,
        b_i,
        p,
        q,
        objective_trace,
        unconverged_inner_solves: unconverged,
        user_idx: HashMap::new(),
        item_idx: HashMap::new(),
    };
    model.reindex();
    Ok(model)
}
