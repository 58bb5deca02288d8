//! Implicit-feedback labeling and in-session negative sampling.
//!
//! Clicks carry no rating, so implicit training needs negatives. Negatives
//! are drawn per session from items the user plausibly saw but skipped:
//! recorded impressions when the log has them, otherwise items active
//! elsewhere in the log around the session's time window. Each session
//! samples from its own seeded RNG, so adding or reordering other sessions
//! never changes a session's draws.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::corpus::{Interaction, ItemId, Label, Session, UserId};
use crate::seed::{derive_seed, rng_from_seed};

/// How far before a session's start the activity fallback looks for
/// candidate items: 24 hours.
pub const DEFAULT_ACTIVITY_WINDOW_SECONDS: i64 = 86_400;

/// One labeled training example for implicit-feedback models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub user_id: UserId,
    pub item_id: ItemId,
    /// Negatives inherit the timestamp of the positive they were drawn for.
    pub timestamp: i64,
    pub label: Label,
    /// Example weight, strictly positive; 1.0 unless a sampler says
    /// otherwise.
    pub weight: f64,
}

/// Mark every session interaction (click or rating alike) as a positive.
///
/// With `dedup` set, repeated (user, item) pairs keep only their first
/// occurrence across the whole output; otherwise repeat engagements stay,
/// which weights frequently revisited items more heavily.
pub fn label_implicit(sessions: &[Session], dedup: bool) -> Vec<LabeledPair> {
    let mut seen: BTreeSet<(UserId, ItemId)> = BTreeSet::new();
    let mut pairs = Vec::new();
    for session in sessions {
        for inter in &session.interactions {
            if dedup && !seen.insert((inter.user_id.clone(), inter.item_id.clone())) {
                continue;
            }
            pairs.push(LabeledPair {
                user_id: inter.user_id.clone(),
                item_id: inter.item_id.clone(),
                timestamp: inter.timestamp,
                label: Label::Positive,
                weight: 1.0,
            });
        }
    }
    pairs
}

/// Per-item activity timestamps, for the candidate-pool fallback when a log
/// records no impressions.
#[derive(Debug, Clone)]
pub struct ItemActivityIndex {
    by_item: BTreeMap<ItemId, Vec<i64>>,
}

impl ItemActivityIndex {
    pub fn build(interactions: &[Interaction]) -> ItemActivityIndex {
        let mut by_item: BTreeMap<ItemId, Vec<i64>> = BTreeMap::new();
        for inter in interactions {
            by_item.entry(inter.item_id.clone()).or_default().push(inter.timestamp);
        }
        for timestamps in by_item.values_mut() {
            timestamps.sort_unstable();
        }
        ItemActivityIndex { by_item }
    }

    /// Items with at least one interaction in `[lo, hi]`, sorted by id.
    pub fn active_in(&self, lo: i64, hi: i64) -> Vec<ItemId> {
        self.by_item
            .iter()
            .filter(|(_, ts)| {
                let from = ts.partition_point(|&t| t < lo);
                from < ts.len() && ts[from] <= hi
            })
            .map(|(item, _)| item.clone())
            .collect()
    }
}

/// Candidate negatives for one session: recorded impressions when present,
/// otherwise items active in \[session start − `window_before`, session
/// end\]; either way minus the items the user touched in the session.
/// Sorted by item id.
pub fn candidate_pool(
    session: &Session,
    activity: &ItemActivityIndex,
    window_before: i64,
) -> Vec<ItemId> {
    let interacted = session.interacted_items();
    let base: Vec<ItemId> = match &session.impressions {
        Some(shown) => shown.iter().cloned().collect(),
        None => activity.active_in(
            session.start_timestamp().saturating_sub(window_before),
            session.end_timestamp(),
        ),
    };
    base.into_iter().filter(|item| !interacted.contains(item)).collect()
}

/// Tallied oddities from negative sampling; surfaced, never fatal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingWarnings {
    /// Sessions whose candidate pool was empty (zero negatives emitted).
    pub empty_pool_sessions: u64,
    /// Sessions whose pool was smaller than the ratio, forcing draws with
    /// replacement.
    pub replacement_sessions: u64,
}

impl SamplingWarnings {
    pub fn merge(&mut self, other: SamplingWarnings) {
        self.empty_pool_sessions += other.empty_pool_sessions;
        self.replacement_sessions += other.replacement_sessions;
    }
}

/// Draw `negatives_per_positive` negatives for every interaction of one
/// session, using the session's own RNG seed.
///
/// Draws are uniform over `pool`. A pool at least as large as the ratio is
/// sampled without replacement per positive; a smaller (non-empty) pool
/// falls back to replacement and flags it. An empty pool yields no
/// negatives and flags that instead.
pub fn sample_negatives(
    session: &Session,
    pool: &[ItemId],
    negatives_per_positive: usize,
    seed: u64,
) -> (Vec<LabeledPair>, SamplingWarnings) {
    let mut warnings = SamplingWarnings::default();
    if pool.is_empty() {
        warnings.empty_pool_sessions = 1;
        return (Vec::new(), warnings);
    }
    let mut rng = rng_from_seed(seed);
    let mut pairs = Vec::with_capacity(session.interactions.len() * negatives_per_positive);
    let with_replacement = pool.len() < negatives_per_positive;
    if with_replacement {
        warnings.replacement_sessions = 1;
    }
    let uniform = Uniform::from(0..pool.len());
    for positive in &session.interactions {
        let chosen: Vec<usize> = if with_replacement {
            (0..negatives_per_positive).map(|_| uniform.sample(&mut rng)).collect()
        } else {
            rand::seq::index::sample(&mut rng, pool.len(), negatives_per_positive).into_vec()
        };
        for idx in chosen {
            pairs.push(LabeledPair {
                user_id: session.user_id.clone(),
                item_id: pool[idx].clone(),
                timestamp: positive.timestamp,
                label: Label::Negative,
                weight: 1.0,
            });
        }
    }
    (pairs, warnings)
}

/// Everything implicit training consumes: positives, negatives, and the
/// warnings accumulated while sampling.
#[derive(Debug, Clone)]
pub struct ImplicitLabeling {
    pub pairs: Vec<LabeledPair>,
    pub warnings: SamplingWarnings,
}

/// Run the full labeling pipeline over sessionized training data: positives
/// via [`label_implicit`], then per-session negatives with seeds derived
/// from `global_seed` and each session's key.
pub fn build_implicit_training(
    sessions: &[Session],
    train_interactions: &[Interaction],
    negatives_per_positive: usize,
    global_seed: u64,
    dedup_positives: bool,
) -> ImplicitLabeling {
    let activity = ItemActivityIndex::build(train_interactions);
    let mut pairs = label_implicit(sessions, dedup_positives);
    let mut warnings = SamplingWarnings::default();
    for session in sessions {
        let pool = candidate_pool(session, &activity, DEFAULT_ACTIVITY_WINDOW_SECONDS);
        let seed = derive_seed(global_seed, &["session", &session.key]);
        let (negatives, w) = sample_negatives(session, &pool, negatives_per_positive, seed);
        pairs.extend(negatives);
        warnings.merge(w);
    }
    ImplicitLabeling { pairs, warnings }
}
