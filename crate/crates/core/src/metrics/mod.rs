//! Accuracy, ranking, and beyond-accuracy metrics, plus the evaluation
//! orchestrator that turns a trained model and a held-out test window into
//! a report.

mod evaluate;
mod features;
mod stats;

pub use evaluate::{
    evaluate_run, EvalOptions, EvaluationOutcome, EvaluationReport, PerUserRow, ReportCounts,
};
pub use features::{FeatureIndex, ItemFeatureVector};
pub use stats::spearman;

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::ItemId;
use crate::error::{Error, Result};

/// Root mean squared error over (actual, predicted) pairs.
pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Data("rmse over an empty set is undefined".into()));
    }
    let sum_sq: f64 = pairs.iter().map(|(a, p)| (a - p) * (a - p)).sum();
    Ok((sum_sq / pairs.len() as f64).sqrt())
}

/// Fraction of the top-k slots filled with relevant items.
///
/// The denominator is always `k`: a model that returns fewer than `k` items
/// is penalized for the unfilled slots.
pub fn precision_at_k(recommended: &[ItemId], relevant: &BTreeSet<ItemId>, k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let hits = recommended
        .iter()
        .take(k)
        .filter(|item| relevant.contains(*item))
        .count();
    hits as f64 / k as f64
}

/// Fraction of the user's relevant items that appear in the top k, or
/// `None` when the user has no relevant items (such users are excluded
/// from averages, not counted as zero).
pub fn recall_at_k(recommended: &[ItemId], relevant: &BTreeSet<ItemId>, k: usize) -> Option<f64> {
    assert!(k >= 1, "k must be at least 1");
    if relevant.is_empty() {
        return None;
    }
    let hits = recommended
        .iter()
        .take(k)
        .filter(|item| relevant.contains(*item))
        .count();
    Some(hits as f64 / relevant.len() as f64)
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Intra-list diversity with the count of items that had no feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityResult {
    pub value: f64,
    /// Items outside the catalog; their pairs count as fully dissimilar and
    /// the condition is surfaced rather than hidden.
    pub missing_items: u64,
}

/// Mean pairwise dissimilarity `1 - cosine` over all unordered pairs of the
/// list. Lists shorter than 2 have diversity 0.
pub fn intra_list_diversity(
    items: &[ItemId],
    vectors: &BTreeMap<String, ItemFeatureVector>,
) -> DiversityResult {
    let mut missing: BTreeSet<&ItemId> = BTreeSet::new();
    if items.len() < 2 {
        for item in items {
            if !vectors.contains_key(item) {
                missing.insert(item);
            }
        }
        return DiversityResult {
            value: 0.0,
            missing_items: missing.len() as u64,
        };
    }
    let mut total = 0.0;
    let mut pairs = 0u64;
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let dissimilarity = match (vectors.get(&items[i]), vectors.get(&items[j])) {
                (Some(a), Some(b)) => 1.0 - a.cosine(b),
                (a, b) => {
                    if a.is_none() {
                        missing.insert(&items[i]);
                    }
                    if b.is_none() {
                        missing.insert(&items[j]);
                    }
                    1.0
                }
            };
            total += dissimilarity;
            pairs += 1;
        }
    }
    DiversityResult {
        value: total / pairs as f64,
        missing_items: missing.len() as u64,
    }
}

/// Fraction of recommended items the user has never interacted with.
/// An empty recommendation list is an error — novelty of nothing is
/// undefined, not perfect.
pub fn novelty_score(recommended: &[ItemId], seen: &BTreeSet<ItemId>) -> Result<f64> {
    if recommended.is_empty() {
        return Err(Error::Data("novelty of an empty recommendation list is undefined".into()));
    }
    let unseen = recommended.iter().filter(|item| !seen.contains(*item)).count();
    Ok(unseen as f64 / recommended.len() as f64)
}

/// Weighted accuracy/diversity trade-off:
/// `w * f1 + (1 - w) * (diversity + novelty) / 2`.
pub fn composite_tradeoff(f1: f64, diversity: f64, novelty: f64, w: f64) -> f64 {
    assert!((0.0..=1.0).contains(&w), "w must be in [0, 1], got {w}");
    w * f1 + (1.0 - w) * (diversity + novelty) / 2.0
}

/// A user's recommendation list: items with their scores, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub user_id: String,
    pub items: Vec<ItemId>,
    pub scores: Vec<f64>,
}

impl RankedList {
    /// Validate the ranking invariants: aligned lengths, finite
    /// non-increasing scores, no duplicate items.
    pub fn new(user_id: impl Into<String>, items: Vec<ItemId>, scores: Vec<f64>) -> Result<RankedList> {
        if items.len() != scores.len() {
            return Err(Error::Data(format!(
                "ranked list has {} items but {} scores",
                items.len(),
                scores.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Data("ranked list contains a non-finite score".into()));
        }
        if scores.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Data("ranked list scores must be non-increasing".into()));
        }
        let distinct: BTreeSet<&ItemId> = items.iter().collect();
        if distinct.len() != items.len() {
            return Err(Error::Data("ranked list contains duplicate items".into()));
        }
        Ok(RankedList {
            user_id: user_id.into(),
            items,
            scores,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The first `k` items (fewer when the list is shorter).
    pub fn prefix(&self, k: usize) -> &[ItemId] {
        &self.items[..self.items.len().min(k)]
    }
}

/// Rank scored candidates and keep the top `k`.
///
/// Deterministic total order: score descending, then item id ascending, so
/// equal-scored items always appear in the same order.
pub fn top_k_by_score(mut scored: Vec<(ItemId, f64)>, k: usize) -> (Vec<ItemId>, Vec<f64>) {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored.into_iter().unzip()
}
