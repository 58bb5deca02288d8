//! Stochastic gradient descent for the temporal factorization model.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Granularity, MfConfig, MfModel};
use crate::corpus::{decompose_timestamp, Catalog, Feedback, Interaction, ItemId, Label, UserId};
use crate::error::{Error, Result};
use crate::intern::Interner;
use crate::sampling::LabeledPair;

/// One SGD training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub user_id: UserId,
    pub item_id: ItemId,
    pub timestamp: i64,
    pub target: f64,
    /// Strictly positive multiplier on the example's error term.
    pub weight: f64,
}

impl TrainExample {
    /// Explicit examples from rating interactions (clicks carry no target
    /// and are skipped here; implicit training labels them instead).
    pub fn from_ratings(interactions: &[Interaction]) -> Vec<TrainExample> {
        interactions
            .iter()
            .filter_map(|inter| match inter.feedback {
                Feedback::Rating(v) => Some(TrainExample {
                    user_id: inter.user_id.clone(),
                    item_id: inter.item_id.clone(),
                    timestamp: inter.timestamp,
                    target: v,
                    weight: 1.0,
                }),
                Feedback::Click => None,
            })
            .collect()
    }

    /// Implicit examples: positives become target 1, negatives target 0.
    pub fn from_labeled(pairs: &[LabeledPair]) -> Vec<TrainExample> {
        pairs
            .iter()
            .map(|pair| TrainExample {
                user_id: pair.user_id.clone(),
                item_id: pair.item_id.clone(),
                timestamp: pair.timestamp,
                target: match pair.label {
                    Label::Positive => 1.0,
                    Label::Negative => 0.0,
                },
                weight: pair.weight,
            })
            .collect()
    }
}

const NO_SLOT: usize = usize::MAX;

/// Per-example resolved indices, so the hot loop never hashes strings or
/// decomposes timestamps.
struct Resolved {
    user: usize,
    item: usize,
    /// Bin per enabled fixed-size granularity, aligned with `enabled`.
    bins: Vec<usize>,
    /// Slot in the year table, or NO_SLOT when years are disabled.
    year: usize,
    cat: usize,
    sub: usize,
}

/// Train by SGD. Examples are shuffled once with the seeded RNG and the
/// same order is replayed every epoch, so a rerun with the same seed walks
/// an identical parameter trajectory. Fails with [`Error::Diverged`] when
/// an epoch ends with a non-finite training loss.
pub fn train_sgd(config: &MfConfig, examples: &[TrainExample], catalog: &Catalog) -> Result<MfModel> {
    config.validate()?;
    if examples.is_empty() {
        return Err(Error::Data("cannot train on zero examples".into()));
    }
    if let Some(bad) = examples.iter().find(|ex| !(ex.weight > 0.0) || !ex.target.is_finite()) {
        return Err(Error::Data(format!(
            "invalid training example for ({}, {}): target {}, weight {}",
            bad.user_id, bad.item_id, bad.target, bad.weight
        )));
    }

    let enabled: Vec<Granularity> = config
        .granularities
        .iter()
        .copied()
        .filter(|g| *g != Granularity::Year)
        .collect();
    let use_year = config.granularities.contains(&Granularity::Year);

    let mut users = Interner::new();
    let mut items = Interner::new();
    let mut cats = Interner::new();
    let mut subs = Interner::new();
    let mut years = Interner::new();

    let mut resolved = Vec::with_capacity(examples.len());
    for ex in examples {
        let td = decompose_timestamp(ex.timestamp)?;
        let (mut cat, mut sub) = (NO_SLOT, NO_SLOT);
        if let Some(entry) = catalog.get(&ex.item_id) {
            if config.use_category {
                cat = cats.intern(&entry.category);
            }
            if config.use_subcategory && !entry.subcategory.is_empty() {
                sub = subs.intern(&entry.subcategory);
            }
        }
        resolved.push(Resolved {
            user: users.intern(&ex.user_id),
            item: items.intern(&ex.item_id),
            bins: enabled.iter().map(|g| g.bin(&td).expect("non-year")).collect(),
            year: if use_year { years.intern(&td.year.to_string()) } else { NO_SLOT },
            cat,
            sub,
        });
    }

    let n = examples.len();
    let k = config.n_factors;
    let mu = examples.iter().map(|ex| ex.target).sum::<f64>() / n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut b_u = vec![0.0; users.names.len()];
    let mut b_i = vec![0.0; items.names.len()];
    let mut tables: Vec<Vec<f64>> = enabled
        .iter()
        .map(|g| vec![0.0; g.bin_count().expect("non-year")])
        .collect();
    let mut year_slots = vec![0.0; years.names.len()];
    let mut d_cat = vec![0.0; cats.names.len()];
    let mut d_sub = vec![0.0; subs.names.len()];
    let (mut p, mut q) = if k > 0 {
        let normal = Normal::new(0.0, config.init_scale / (k as f64).sqrt())
            .expect("positive init scale");
        let p: Vec<f64> = (0..users.names.len() * k).map(|_| normal.sample(&mut rng)).collect();
        let q: Vec<f64> = (0..items.names.len() * k).map(|_| normal.sample(&mut rng)).collect();
        (p, q)
    } else {
        (Vec::new(), Vec::new())
    };

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let eta = config.learning_rate;
    let lambda = config.l2_reg;
    let mut loss_trace = Vec::with_capacity(config.epochs);

    let raw_of = |idx: usize,
                  b_u: &[f64],
                  b_i: &[f64],
                  tables: &[Vec<f64>],
                  year_slots: &[f64],
                  d_cat: &[f64],
                  d_sub: &[f64],
                  p: &[f64],
                  q: &[f64]| {
        let r = &resolved[idx];
        let mut pred = mu + b_u[r.user] + b_i[r.item];
        for (t, &bin) in tables.iter().zip(&r.bins) {
            pred += t[bin];
        }
        if r.year != NO_SLOT {
            pred += year_slots[r.year];
        }
        if r.cat != NO_SLOT {
            pred += d_cat[r.cat];
        }
        if r.sub != NO_SLOT {
            pred += d_sub[r.sub];
        }
        if k > 0 {
            let pu = &p[r.user * k..(r.user + 1) * k];
            let qi = &q[r.item * k..(r.item + 1) * k];
            pred += pu.iter().zip(qi).map(|(a, b)| a * b).sum::<f64>();
        }
        pred
    };

    for epoch in 1..=config.epochs {
        for &idx in &perm {
            let pred = raw_of(idx, &b_u, &b_i, &tables, &year_slots, &d_cat, &d_sub, &p, &q);
            let r = &resolved[idx];
            let we = examples[idx].weight * (examples[idx].target - pred);

            b_u[r.user] += eta * (we - lambda * b_u[r.user]);
            b_i[r.item] += eta * (we - lambda * b_i[r.item]);
            for (t, &bin) in tables.iter_mut().zip(&r.bins) {
                t[bin] += eta * (we - lambda * t[bin]);
            }
            if r.year != NO_SLOT {
                year_slots[r.year] += eta * (we - lambda * year_slots[r.year]);
            }
            if r.cat != NO_SLOT {
                d_cat[r.cat] += eta * (we - lambda * d_cat[r.cat]);
            }
            if r.sub != NO_SLOT {
                d_sub[r.sub] += eta * (we - lambda * d_sub[r.sub]);
            }
            if k > 0 {
                // Both factor updates read the pre-update vectors.
                let (pu_base, qi_base) = (r.user * k, r.item * k);
                for f in 0..k {
                    let pu = p[pu_base + f];
                    let qi = q[qi_base + f];
                    p[pu_base + f] += eta * (we * qi - lambda * pu);
                    q[qi_base + f] += eta * (we * pu - lambda * qi);
                }
            }
        }

        let sse: f64 = (0..n)
            .map(|idx| {
                let e = examples[idx].target
                    - raw_of(idx, &b_u, &b_i, &tables, &year_slots, &d_cat, &d_sub, &p, &q);
                e * e
            })
            .sum();
        let epoch_rmse = (sse / n as f64).sqrt();
        if !epoch_rmse.is_finite() {
            return Err(Error::Diverged {
                epoch,
                last_loss: loss_trace.last().copied().unwrap_or(f64::NAN),
            });
        }
        loss_trace.push(epoch_rmse);
    }

    let time_bins: BTreeMap<Granularity, Vec<f64>> =
        enabled.into_iter().zip(tables).collect();
    let year_bias: BTreeMap<i32, f64> = years
        .names
        .iter()
        .zip(&year_slots)
        .map(|(name, &v)| (name.parse::<i32>().expect("interned from i32"), v))
        .collect();

    Ok(MfModel::assemble(
        config.clone(),
        mu,
        users.names,
        items.names,
        b_u,
        b_i,
        time_bins,
        year_bias,
        cats.names,
        d_cat,
        subs.names,
        d_sub,
        p,
        q,
        loss_trace,
    ))
}
