//! Calendar decomposition of unix timestamps and activity profiling.
//!
//! All calendar math is UTC; day-of-week is Monday-based (`0 = Monday`) so
//! the weekday bins line up with how news consumption is usually charted.

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Timelike};
use serde::{Deserialize, Serialize};

use super::Interaction;
use crate::error::{Error, Result};

/// A unix timestamp broken into the calendar units used for time biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeDecomposition {
    pub year: i32,
    /// 1..=12
    pub month: u32,
    /// 0..=6, Monday-based.
    pub day_of_week: u32,
    /// 0..=23
    pub hour: u32,
    /// 0..=59
    pub minute: u32,
    /// 0..=59
    pub second: u32,
}

/// Decompose a non-negative unix timestamp (seconds, UTC).
pub fn decompose_timestamp(timestamp: i64) -> Result<TimeDecomposition> {
    if timestamp < 0 {
        return Err(Error::Data(format!("negative timestamp {timestamp}")));
    }
    let dt = DateTime::from_timestamp(timestamp, 0)
        .ok_or_else(|| Error::Data(format!("timestamp {timestamp} out of calendar range")))?;
    Ok(TimeDecomposition {
        year: dt.year(),
        month: dt.month(),
        day_of_week: dt.weekday().num_days_from_monday(),
        hour: dt.hour(),
        minute: dt.minute(),
        second: dt.second(),
    })
}

/// Interaction counts per calendar unit over a whole log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeProfile {
    /// Count per hour of day, index 0..24.
    pub hour_counts: Vec<u64>,
    /// Count per day of week, index 0..7, Monday-based.
    pub day_of_week_counts: Vec<u64>,
    /// Count per calendar month, keyed `"YYYY-MM"` (sorts chronologically).
    pub month_counts: BTreeMap<String, u64>,
    /// Interactions whose timestamp failed to decompose (out of range).
    pub undecomposable: u64,
}

/// Histogram the log by hour, weekday, and calendar month.
pub fn profile_time_series(interactions: &[Interaction]) -> TimeProfile {
    let mut profile = TimeProfile {
        hour_counts: vec![0; 24],
        day_of_week_counts: vec![0; 7],
        month_counts: BTreeMap::new(),
        undecomposable: 0,
    };
    for inter in interactions {
        match decompose_timestamp(inter.timestamp) {
            Ok(td) => {
                profile.hour_counts[td.hour as usize] += 1;
                profile.day_of_week_counts[td.day_of_week as usize] += 1;
                let key = format!("{:04}-{:02}", td.year, td.month);
                *profile.month_counts.entry(key).or_insert(0) += 1;
            }
            Err(_) => profile.undecomposable += 1,
        }
    }
    profile
}
