//! Interaction-log corpus: data model, TSV parsing, calendar decomposition,
//! sessionization, and the leakage-free time-based split.

mod parse;
mod session;
mod split;
mod time;

pub use parse::{parse_catalog, parse_interactions, CatalogParse, InteractionsParse, ParseTally};
pub use session::{sessionize, Session, DEFAULT_SESSION_GAP_SECONDS};
pub use split::{time_based_split, SplitResult};
pub use time::{decompose_timestamp, profile_time_series, TimeDecomposition, TimeProfile};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Opaque user identifier (non-empty).
pub type UserId = String;
/// Opaque item identifier (non-empty).
pub type ItemId = String;

/// One catalogued news item with its taxonomy labels and display text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsItem {
    pub item_id: ItemId,
    /// Top-level taxonomy label; always non-empty.
    pub category: String,
    /// Finer taxonomy label; may be empty when the feed does not provide one.
    pub subcategory: String,
    pub title: String,
    pub snippet: String,
}

impl NewsItem {
    /// Lowercased alphanumeric tokens of `title` followed by `snippet`.
    ///
    /// Tokens split on any non-alphanumeric run, so `"U.S. markets"` yields
    /// `["u", "s", "markets"]`. Used for the text block of item feature
    /// vectors.
    pub fn text_tokens(&self) -> Vec<String> {
        let mut tokens = Vec::new();
        for field in [&self.title, &self.snippet] {
            for tok in field.split(|c: char| !c.is_alphanumeric()) {
                if !tok.is_empty() {
                    tokens.push(tok.to_lowercase());
                }
            }
        }
        tokens
    }
}

/// What a user did with an item.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Feedback {
    /// Explicit rating on the dataset's declared scale.
    Rating(f64),
    /// Implicit positive signal with no value attached.
    Click,
}

impl Feedback {
    pub fn rating(&self) -> Option<f64> {
        match self {
            Feedback::Rating(v) => Some(*v),
            Feedback::Click => None,
        }
    }
}

/// Positive/negative mark assigned by implicit labeling; parsed interactions
/// carry none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Positive,
    Negative,
}

/// A single logged event: `user` interacted with `item` at `timestamp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub user_id: UserId,
    pub item_id: ItemId,
    /// Unix timestamp, seconds UTC; never negative.
    pub timestamp: i64,
    pub feedback: Feedback,
    /// Log-provided session identifier, if any.
    pub session_id: Option<String>,
    /// Set only by implicit labeling; `None` straight from the parser.
    pub label: Option<Label>,
}

impl Interaction {
    pub fn new(user_id: impl Into<UserId>, item_id: impl Into<ItemId>, timestamp: i64, feedback: Feedback) -> Self {
        Interaction {
            user_id: user_id.into(),
            item_id: item_id.into(),
            timestamp,
            feedback,
            session_id: None,
            label: None,
        }
    }

    pub fn with_session(mut self, session_id: impl Into<String>) -> Self {
        self.session_id = Some(session_id.into());
        self
    }
}

/// Item catalog keyed by id; ordered so iteration is deterministic.
pub type Catalog = BTreeMap<ItemId, NewsItem>;

/// A parsed corpus: catalog plus the interaction log that references it.
///
/// Interactions whose `item_id` is missing from the catalog are kept (models
/// can still learn their biases) but counted in [`Dataset::tally`] and
/// surfaced in every downstream report.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub catalog: Catalog,
    pub interactions: Vec<Interaction>,
    /// Declared inclusive rating scale, e.g. `(1.0, 5.0)`.
    pub rating_scale: (f64, f64),
    /// Line-level problems observed while parsing both files.
    pub tally: ParseTally,
}

impl Dataset {
    /// Assemble a dataset from separately parsed catalog and interactions,
    /// merging their tallies and counting unknown-item references.
    pub fn assemble(catalog: CatalogParse, interactions: InteractionsParse, rating_scale: (f64, f64)) -> Dataset {
        let mut tally = catalog.tally;
        tally.merge(interactions.tally);
        for inter in &interactions.interactions {
            if !catalog.items.contains_key(&inter.item_id) {
                tally.unknown_items += 1;
            }
        }
        Dataset {
            catalog: catalog.items,
            interactions: interactions.interactions,
            rating_scale,
            tally,
        }
    }
}
