//! Tab-separated parsers for the catalog and interaction-log formats.
//!
//! Both parsers are tolerant: a malformed line never aborts the parse, it is
//! recorded in a [`ParseTally`] with its line number and kept out of the
//! result. Callers decide whether the tally is acceptable.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{Catalog, Feedback, Interaction, NewsItem};
use crate::error::Result;

/// Counts (and line numbers) of problems seen while parsing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseTally {
    /// Lines rejected outright: wrong column count, empty ids, bad numbers.
    pub bad_lines: u64,
    /// 1-based line numbers of the rejected lines, with a short reason.
    pub bad_line_details: Vec<(u64, String)>,
    /// Interactions referencing an item absent from the catalog (these are
    /// kept, not dropped).
    pub unknown_items: u64,
    /// Catalog lines whose `item_id` repeated an earlier line (last wins).
    pub duplicate_items: u64,
}

impl ParseTally {
    pub fn merge(&mut self, other: ParseTally) {
        self.bad_lines += other.bad_lines;
        self.bad_line_details.extend(other.bad_line_details);
        self.unknown_items += other.unknown_items;
        self.duplicate_items += other.duplicate_items;
    }

    fn reject(&mut self, line_no: u64, reason: impl Into<String>) {
        self.bad_lines += 1;
        self.bad_line_details.push((line_no, reason.into()));
    }

    /// The fixed-schema JSON object emitted by `ingest`:
    /// `{"bad_lines": N, "unknown_items": M}`.
    pub fn summary_json(&self) -> String {
        format!(
            "{{\"bad_lines\": {}, \"unknown_items\": {}}}",
            self.bad_lines, self.unknown_items
        )
    }
}

/// Result of [`parse_catalog`].
#[derive(Debug, Clone)]
pub struct CatalogParse {
    pub items: Catalog,
    pub tally: ParseTally,
}

/// Result of [`parse_interactions`].
#[derive(Debug, Clone)]
pub struct InteractionsParse {
    pub interactions: Vec<Interaction>,
    pub tally: ParseTally,
}

/// Parse the item catalog: `item_id \t category \t subcategory \t title \t
/// snippet`, one item per line, no quoting.
///
/// `header` skips the first line. Duplicate ids keep the last occurrence and
/// bump [`ParseTally::duplicate_items`].
pub fn parse_catalog(reader: impl BufRead, header: bool) -> Result<CatalogParse> {
    let mut items = Catalog::new();
    let mut tally = ParseTally::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if header && idx == 0 {
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            tally.reject(line_no, format!("expected 5 columns, got {}", fields.len()));
            continue;
        }
        let (item_id, category) = (fields[0], fields[1]);
        if item_id.is_empty() {
            tally.reject(line_no, "empty item_id");
            continue;
        }
        if category.is_empty() {
            tally.reject(line_no, "empty category");
            continue;
        }
        let item = NewsItem {
            item_id: item_id.to_string(),
            category: category.to_string(),
            subcategory: fields[2].to_string(),
            title: fields[3].to_string(),
            snippet: fields[4].to_string(),
        };
        if items.insert(item.item_id.clone(), item).is_some() {
            tally.duplicate_items += 1;
        }
    }
    Ok(CatalogParse { items, tally })
}

/// Parse the interaction log: `user_id \t item_id \t unix_ts \t kind \t
/// value \t session_id`.
///
/// `kind` is `rating` (with `value` on `rating_scale`) or `click` (`value`
/// ignored). An empty `session_id` column means "no session id".
pub fn parse_interactions(
    reader: impl BufRead,
    header: bool,
    rating_scale: (f64, f64),
) -> Result<InteractionsParse> {
    let mut interactions = Vec::new();
    let mut tally = ParseTally::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if header && idx == 0 {
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            tally.reject(line_no, format!("expected 6 columns, got {}", fields.len()));
            continue;
        }
        let (user_id, item_id, ts_str, kind, value, session) =
            (fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]);
        if user_id.is_empty() {
            tally.reject(line_no, "empty user_id");
            continue;
        }
        if item_id.is_empty() {
            tally.reject(line_no, "empty item_id");
            continue;
        }
        let timestamp = match ts_str.parse::<i64>() {
            Ok(ts) if ts >= 0 => ts,
            Ok(_) => {
                tally.reject(line_no, "negative timestamp");
                continue;
            }
            Err(_) => {
                tally.reject(line_no, format!("non-integer timestamp `{ts_str}`"));
                continue;
            }
        };
        let feedback = match kind {
            "click" => Feedback::Click,
            "rating" => match value.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= rating_scale.0 && v <= rating_scale.1 => {
                    Feedback::Rating(v)
                }
                Ok(v) => {
                    tally.reject(line_no, format!("rating {v} outside scale"));
                    continue;
                }
                Err(_) => {
                    tally.reject(line_no, format!("unparsable rating `{value}`"));
                    continue;
                }
            },
            other => {
                tally.reject(line_no, format!("unknown kind `{other}`"));
                continue;
            }
        };
        let mut interaction = Interaction::new(user_id, item_id, timestamp, feedback);
        if !session.is_empty() {
            interaction.session_id = Some(session.to_string());
        }
        interactions.push(interaction);
    }
    Ok(InteractionsParse { interactions, tally })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn catalog_of(text: &str) -> CatalogParse {
        parse_catalog(Cursor::new(text), false).unwrap()
    }

    fn interactions_of(text: &str) -> InteractionsParse {
        parse_interactions(Cursor::new(text), false, (1.0, 5.0)).unwrap()
    }

    #[test]
    fn parses_well_formed_catalog_line() {
        let parsed = catalog_of("n1\tsports\tfootball\tBig match\tA match happened\n");
        assert_eq!(parsed.tally.bad_lines, 0);
        let item = &parsed.items["n1"];
        assert_eq!(item.category, "sports");
        assert_eq!(item.subcategory, "football");
    }

    #[test]
    fn wrong_column_count_is_tallied_with_line_number() {
        let parsed = catalog_of("n1\tsports\tfootball\tBig match\tsnippet\nn2\tnews\n");
        assert_eq!(parsed.tally.bad_lines, 1);
        assert_eq!(parsed.tally.bad_line_details[0].0, 2);
        assert_eq!(parsed.items.len(), 1);
    }

    #[test]
    fn duplicate_item_keeps_last_and_counts() {
        let parsed = catalog_of("n1\ta\t\tfirst\ts\nn1\tb\t\tsecond\ts\n");
        assert_eq!(parsed.tally.duplicate_items, 1);
        assert_eq!(parsed.items["n1"].category, "b");
        assert_eq!(parsed.items["n1"].title, "second");
    }

    #[test]
    fn header_flag_skips_first_line() {
        let parsed = parse_catalog(
            Cursor::new("item_id\tcategory\tsubcategory\ttitle\tsnippet\nn1\ta\tb\tt\ts\n"),
            true,
        )
        .unwrap();
        assert_eq!(parsed.tally.bad_lines, 0);
        assert_eq!(parsed.items.len(), 1);
    }

    #[test]
    fn empty_category_is_rejected_but_empty_subcategory_allowed() {
        let parsed = catalog_of("n1\t\tsub\tt\ts\nn2\tcat\t\tt\ts\n");
        assert_eq!(parsed.tally.bad_lines, 1);
        assert!(parsed.items.contains_key("n2"));
    }

    #[test]
    fn parses_rating_and_click_rows() {
        let parsed =
            interactions_of("u1\tn1\t1000\trating\t4.5\t\nu1\tn2\t1100\tclick\t\tsess9\n");
        assert_eq!(parsed.tally.bad_lines, 0);
        assert_eq!(parsed.interactions[0].feedback, Feedback::Rating(4.5));
        assert_eq!(parsed.interactions[0].session_id, None);
        assert_eq!(parsed.interactions[1].feedback, Feedback::Click);
        assert_eq!(parsed.interactions[1].session_id.as_deref(), Some("sess9"));
    }

    #[test]
    fn bad_interaction_rows_are_tallied_individually() {
        let text = concat!(
            "u1\tn1\tnot_a_ts\trating\t4.0\t\n",   // non-integer timestamp
            "u1\tn1\t1000\tshare\t\t\n",           // unknown kind
            "u1\tn1\t1000\trating\t9.0\t\n",       // rating outside scale
            "u1\tn1\t-5\tclick\t\t\n",             // negative timestamp
            "u1\tn1\t1000\trating\t3.0\t\n",       // good
        );
        let parsed = interactions_of(text);
        assert_eq!(parsed.tally.bad_lines, 4);
        assert_eq!(parsed.interactions.len(), 1);
        let lines: Vec<u64> = parsed.tally.bad_line_details.iter().map(|d| d.0).collect();
        assert_eq!(lines, vec![1, 2, 3, 4]);
    }

    #[test]
    fn rating_bounds_are_inclusive() {
        let parsed = interactions_of("u1\tn1\t0\trating\t1.0\t\nu1\tn1\t0\trating\t5.0\t\n");
        assert_eq!(parsed.tally.bad_lines, 0);
        assert_eq!(parsed.interactions.len(), 2);
    }

    #[test]
    fn summary_json_has_fixed_schema() {
        let mut tally = ParseTally::default();
        tally.reject(3, "x");
        tally.unknown_items = 2;
        assert_eq!(tally.summary_json(), "{\"bad_lines\": 1, \"unknown_items\": 2}");
    }

    #[test]
    fn unknown_item_interactions_are_kept_and_counted() {
        let catalog = catalog_of("n1\tcat\t\tt\ts\n");
        let inters = interactions_of("u1\tn1\t10\tclick\t\t\nu1\tghost\t20\tclick\t\t\n");
        let ds = crate::corpus::Dataset::assemble(catalog, inters, (1.0, 5.0));
        assert_eq!(ds.tally.unknown_items, 1);
        assert_eq!(ds.interactions.len(), 2, "unknown-item rows are kept");
    }
}
