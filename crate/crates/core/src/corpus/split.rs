//! Leakage-free time-based train/test split.

use serde::{Deserialize, Serialize};

use super::Interaction;
use crate::error::{Error, Result};

/// Outcome of [`time_based_split`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitResult {
    pub train: Vec<Interaction>,
    pub test: Vec<Interaction>,
    /// Largest timestamp included in `train`; everything strictly later is
    /// in `test`.
    pub split_timestamp: i64,
}

/// Split interactions at a timestamp quantile: train is everything at or
/// before the cut, test everything after, so no test interaction precedes a
/// train interaction.
///
/// The cut is the smallest timestamp `t` with `|{x : x.ts <= t}| / n >=
/// train_fraction`, stepped back to the previous distinct timestamp if that
/// would leave the test side empty. Input order is preserved within each
/// side. Fails when `train_fraction` is outside `(0, 1)` or all timestamps
/// are equal (no cut can produce two non-empty sides).
pub fn time_based_split(interactions: &[Interaction], train_fraction: f64) -> Result<SplitResult> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    if interactions.len() < 2 {
        return Err(Error::Data(format!(
            "need at least 2 interactions to split, got {}",
            interactions.len()
        )));
    }

    let mut timestamps: Vec<i64> = interactions.iter().map(|i| i.timestamp).collect();
    timestamps.sort_unstable();
    let n = timestamps.len();
    if timestamps[0] == timestamps[n - 1] {
        return Err(Error::Data(
            "all interactions share one timestamp; a time-based split is impossible".into(),
        ));
    }

    // Smallest timestamp whose cumulative share reaches the fraction. The
    // sorted scan accumulates whole runs of equal timestamps at once.
    let max_ts = timestamps[n - 1];
    let mut split_timestamp = None;
    let mut i = 0;
    while i < n {
        let t = timestamps[i];
        let mut j = i;
        while j < n && timestamps[j] == t {
            j += 1;
        }
        if j as f64 / n as f64 >= train_fraction {
            split_timestamp = Some(t);
            break;
        }
        i = j;
    }
    let mut split_timestamp = split_timestamp.unwrap_or(max_ts);
    if split_timestamp == max_ts {
        // Keep the test side non-empty: step back to the previous distinct
        // timestamp (one exists, timestamps are not all equal).
        split_timestamp = timestamps[timestamps.partition_point(|&t| t < max_ts) - 1];
    }

    let (train, test): (Vec<Interaction>, Vec<Interaction>) = interactions
        .iter()
        .cloned()
        .partition(|inter| inter.timestamp <= split_timestamp);
    Ok(SplitResult {
        train,
        test,
        split_timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Feedback;

    fn at(ts: i64) -> Interaction {
        Interaction::new("u", format!("n{ts}"), ts, Feedback::Click)
    }

    #[test]
    fn quantile_rule_on_repeated_timestamps() {
        // {1,1,1,9} at 0.5: t=1 already covers 3/4 >= 0.5.
        let interactions = vec![at(1), at(1), at(1), at(9)];
        let split = time_based_split(&interactions, 0.5).unwrap();
        assert_eq!(split.split_timestamp, 1);
        assert_eq!(split.train.len(), 3);
        assert_eq!(split.test.len(), 1);
        assert_eq!(split.test[0].timestamp, 9);
    }

    #[test]
    fn steps_back_when_the_quantile_hits_the_maximum() {
        // {1,2} at 0.99 would pick t=2 and empty the test side; step back to 1.
        let interactions = vec![at(1), at(2)];
        let split = time_based_split(&interactions, 0.99).unwrap();
        assert_eq!(split.split_timestamp, 1);
        assert_eq!(split.train.len(), 1);
        assert_eq!(split.test.len(), 1);
    }

    #[test]
    fn all_equal_timestamps_cannot_split() {
        let interactions = vec![at(5), at(5), at(5)];
        assert!(time_based_split(&interactions, 0.5).is_err());
    }

    #[test]
    fn invalid_fraction_is_a_config_error() {
        let interactions = vec![at(1), at(2)];
        for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(time_based_split(&interactions, f).is_err(), "fraction {f}");
        }
    }

    #[test]
    fn no_test_interaction_precedes_a_train_interaction() {
        let interactions: Vec<Interaction> = [30, 10, 20, 50, 40, 10, 60].iter().map(|&t| at(t)).collect();
        let split = time_based_split(&interactions, 0.6).unwrap();
        let train_max = split.train.iter().map(|i| i.timestamp).max().unwrap();
        let test_min = split.test.iter().map(|i| i.timestamp).min().unwrap();
        assert!(train_max <= split.split_timestamp);
        assert!(test_min > split.split_timestamp);
        assert_eq!(split.train.len() + split.test.len(), interactions.len());
    }

    #[test]
    fn input_order_is_preserved_within_each_side() {
        let interactions = vec![at(30), at(10), at(20), at(50), at(40)];
        let split = time_based_split(&interactions, 0.6).unwrap();
        let train_ts: Vec<i64> = split.train.iter().map(|i| i.timestamp).collect();
        assert_eq!(train_ts, vec![30, 10, 20], "log order, not sorted");
    }
}
