//! Grouping interaction logs into user sessions.
//!
//! A log-provided `session_id` is authoritative: interactions sharing one
//! form a session no matter how far apart in time. Interactions without an
//! id fall back to the inactivity-gap rule.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Interaction, ItemId, UserId};

/// Inactivity gap that closes an id-less session: 30 minutes.
pub const DEFAULT_SESSION_GAP_SECONDS: i64 = 1800;

/// A contiguous burst of one user's activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub user_id: UserId,
    /// Stable key naming this session, used to derive per-session RNG seeds.
    /// `id:<user>:<session_id>` for explicit sessions,
    /// `gap:<user>:<start_ts>:<n>` for gap-derived ones.
    pub key: String,
    /// The session's interactions in ascending timestamp order.
    pub interactions: Vec<Interaction>,
    /// Items shown to the user during this session, when the log records
    /// impressions. `None` means "not recorded", not "none shown".
    pub impressions: Option<BTreeSet<ItemId>>,
}

impl Session {
    pub fn start_timestamp(&self) -> i64 {
        self.interactions.first().map(|i| i.timestamp).unwrap_or(0)
    }

    pub fn end_timestamp(&self) -> i64 {
        self.interactions.last().map(|i| i.timestamp).unwrap_or(0)
    }

    /// Distinct items the user actually interacted with in this session.
    pub fn interacted_items(&self) -> BTreeSet<ItemId> {
        self.interactions.iter().map(|i| i.item_id.clone()).collect()
    }
}

/// Partition interactions into per-user sessions.
///
/// Each user's interactions are sorted by timestamp (ties keep log order),
/// then split: interactions with an explicit `session_id` group by that id,
/// the rest start a new session whenever the gap to the previous id-less
/// interaction exceeds `gap_seconds`. Sessions are returned ordered by
/// (user, start timestamp, key), and every input interaction lands in
/// exactly one session.
pub fn sessionize(interactions: &[Interaction], gap_seconds: i64) -> Vec<Session> {
    let mut by_user: BTreeMap<&UserId, Vec<&Interaction>> = BTreeMap::new();
    for inter in interactions {
        by_user.entry(&inter.user_id).or_default().push(inter);
    }

    let mut sessions = Vec::new();
    for (user, mut rows) in by_user {
        // Stable sort: equal timestamps keep their log order.
        rows.sort_by_key(|i| i.timestamp);

        let mut explicit: BTreeMap<&str, Vec<Interaction>> = BTreeMap::new();
        let mut gap_runs: Vec<Vec<Interaction>> = Vec::new();
        for inter in rows {
            match inter.session_id.as_deref() {
                Some(sid) => explicit.entry(sid).or_default().push(inter.clone()),
                None => {
                    let start_new = match gap_runs.last().and_then(|run| run.last()) {
                        Some(prev) => inter.timestamp - prev.timestamp > gap_seconds,
                        None => true,
                    };
                    if start_new {
                        gap_runs.push(Vec::new());
                    }
                    gap_runs.last_mut().expect("run just ensured").push(inter.clone());
                }
            }
        }

        let mut user_sessions: Vec<Session> = Vec::new();
        for (sid, rows) in explicit {
            user_sessions.push(Session {
                user_id: user.clone(),
                key: format!("id:{user}:{sid}"),
                interactions: rows,
                impressions: None,
            });
        }
        for (n, rows) in gap_runs.into_iter().enumerate() {
            let start = rows.first().map(|i| i.timestamp).unwrap_or(0);
            user_sessions.push(Session {
                user_id: user.clone(),
                key: format!("gap:{user}:{start}:{n}"),
                interactions: rows,
                impressions: None,
            });
        }
        user_sessions.sort_by(|a, b| {
            a.start_timestamp()
                .cmp(&b.start_timestamp())
                .then_with(|| a.key.cmp(&b.key))
        });
        sessions.extend(user_sessions);
    }
    sessions
}
