//! Recency-weighted popularity baseline.
//!
//! Scores every item by summing exponentially decayed interaction counts:
//! an interaction `age` seconds before the reference time contributes
//! `2^(-age / half_life)`. User and query time are ignored — this is the
//! non-personalized yardstick personalized models must beat.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Interaction, ItemId};
use crate::error::{Error, Result};
use crate::scorer::ItemScorer;

/// Default half-life: one week.
pub const DEFAULT_HALF_LIFE_SECONDS: f64 = 604_800.0;

/// Weight of an interaction `age_seconds` old: `2^(-age / half_life)`.
pub fn decay_weight(age_seconds: f64, half_life_seconds: f64) -> f64 {
    (-age_seconds / half_life_seconds).exp2()
}

/// The trained baseline: per-item decayed popularity at `reference_time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    /// The "now" the decay was computed against (typically the split
    /// timestamp).
    pub reference_time: i64,
    pub half_life_seconds: f64,
    scores: BTreeMap<ItemId, f64>,
}

/// Accumulate decayed popularity over a training window.
pub fn train_decay(
    interactions: &[Interaction],
    reference_time: i64,
    half_life_seconds: f64,
) -> Result<DecayModel> {
    if !(half_life_seconds > 0.0 && half_life_seconds.is_finite()) {
        return Err(Error::Config(format!(
            "half_life_seconds must be positive, got {half_life_seconds}"
        )));
    }
    if interactions.is_empty() {
        return Err(Error::Data("cannot fit the decay baseline on zero interactions".into()));
    }
    let mut scores: BTreeMap<ItemId, f64> = BTreeMap::new();
    for inter in interactions {
        let age = (reference_time - inter.timestamp) as f64;
        *scores.entry(inter.item_id.clone()).or_insert(0.0) += decay_weight(age, half_life_seconds);
    }
    Ok(DecayModel {
        reference_time,
        half_life_seconds,
        scores,
    })
}

impl DecayModel {
    /// Decayed popularity of an item; unseen items score 0.
    pub fn score_item(&self, item_id: &str) -> f64 {
        self.scores.get(item_id).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<DecayModel> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DecayModel> {
        DecayModel::from_json(&std::fs::read_to_string(path)?)
    }
}

impl ItemScorer for DecayModel {
    fn score(&self, _user_id: &str, item_id: &str, _timestamp: i64) -> f64 {
        self.score_item(item_id)
    }
}
