//! Synthetic corpus generation with planted, recoverable signals.
//!
//! The generator writes files in exactly the formats the parsers read, so
//! a synthetic run exercises the same ingestion path as a real one. Every
//! signal a model family is supposed to recover can be planted
//! independently: per-hour and per-day-of-week rating offsets, global
//! category/subcategory offsets, per-user category affinities, power-law
//! item popularity, a rank-r latent interaction, and Gaussian noise. The
//! drawn parameters are returned (and written) as ground truth so tests
//! can verify generated data against the construction, and everything
//! downstream of `(spec, seed)` is byte-identical across reruns.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::corpus::{Catalog, Dataset, Feedback, Interaction, NewsItem, ParseTally};
use crate::error::{Error, Result};

use super::config::{format_indexed, parse_indexed, parse_list, RawConfig};

const SECONDS_PER_WEEK: i64 = 7 * 86_400;

/// `[synthetic]` block: sizes, planted signals, and layout knobs.
///
/// Effects lists use `index:value` syntax (`hour_effects = 19:1.0`);
/// sampling weights use the same syntax with unlisted indices at weight 1.
/// `category_effects`/`subcategory_effects` are plain value lists cycled
/// over the categories (flattened category×subcategory slots).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_users: usize,
    pub n_items: usize,
    pub n_interactions: usize,
    pub n_categories: usize,
    pub subcategories_per_category: usize,
    /// Mean rating before any planted effect.
    pub base_rating: f64,
    pub user_bias_sd: f64,
    pub item_bias_sd: f64,
    /// Per-(user, category) affinity spread; 0 disables the signal.
    pub user_affinity_sd: f64,
    pub category_effects: Vec<f64>,
    pub subcategory_effects: Vec<f64>,
    pub hour_effects: Vec<(usize, f64)>,
    pub hour_weights: Vec<(usize, f64)>,
    pub dow_effects: Vec<(usize, f64)>,
    pub dow_weights: Vec<(usize, f64)>,
    /// Rank of the planted latent interaction; 0 disables it.
    pub latent_rank: usize,
    pub latent_scale: f64,
    pub noise_sd: f64,
    /// Probability an interaction is an explicit rating (else a click).
    pub explicit_prob: f64,
    /// Item choice weight multiplier `exp(selection_bias * affinity)`.
    pub selection_bias: f64,
    /// Item popularity follows `1 / rank^exponent`; 0 is uniform.
    pub popularity_exponent: f64,
    /// Interactions per explicit session id within a user's timeline.
    pub session_size: usize,
    pub n_weeks: usize,
    /// Start of week 0; the default is a Monday 00:00:00 UTC.
    pub base_timestamp: i64,
    pub tokens_per_item: usize,
    pub vocab_per_category: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_users: 100,
            n_items: 300,
            n_interactions: 5_000,
            n_categories: 5,
            subcategories_per_category: 3,
            base_rating: 5.0,
            user_bias_sd: 0.3,
            item_bias_sd: 0.3,
            user_affinity_sd: 0.0,
            category_effects: Vec::new(),
            subcategory_effects: Vec::new(),
            hour_effects: Vec::new(),
            hour_weights: Vec::new(),
            dow_effects: Vec::new(),
            dow_weights: Vec::new(),
            latent_rank: 0,
            latent_scale: 0.5,
            noise_sd: 0.5,
            explicit_prob: 1.0,
            selection_bias: 0.0,
            popularity_exponent: 0.0,
            session_size: 5,
            n_weeks: 4,
            base_timestamp: 1_572_825_600,
            tokens_per_item: 6,
            vocab_per_category: 30,
        }
    }
}

impl SynthSpec {
    pub(crate) fn resolve(raw: &mut RawConfig) -> Result<SynthSpec> {
        let s = "synthetic";
        let d = SynthSpec::default();
        let take_num = |raw: &mut RawConfig, key: &str, default: usize| -> Result<usize> {
            match raw.take(s, key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::Config(format!("{s}.{key}: cannot parse {v:?}"))),
                None => Ok(default),
            }
        };
        let take_f = |raw: &mut RawConfig, key: &str, default: f64| -> Result<f64> {
            match raw.take(s, key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::Config(format!("{s}.{key}: cannot parse {v:?}"))),
                None => Ok(default),
            }
        };
        let take_effects = |raw: &mut RawConfig, key: &str| -> Result<Vec<f64>> {
            match raw.take(s, key) {
                Some(v) if !v.trim().is_empty() => parse_list(s, key, &v),
                _ => Ok(Vec::new()),
            }
        };
        let take_indexed = |raw: &mut RawConfig, key: &str, limit: usize| {
            match raw.take(s, key) {
                Some(v) => parse_indexed(s, key, &v, limit),
                None => Ok(Vec::new()),
            }
        };

        let spec = SynthSpec {
            n_users: take_num(raw, "n_users", d.n_users)?,
            n_items: take_num(raw, "n_items", d.n_items)?,
            n_interactions: take_num(raw, "n_interactions", d.n_interactions)?,
            n_categories: take_num(raw, "n_categories", d.n_categories)?,
            subcategories_per_category: take_num(
                raw,
                "subcategories_per_category",
                d.subcategories_per_category,
            )?,
            base_rating: take_f(raw, "base_rating", d.base_rating)?,
            user_bias_sd: take_f(raw, "user_bias_sd", d.user_bias_sd)?,
            item_bias_sd: take_f(raw, "item_bias_sd", d.item_bias_sd)?,
            user_affinity_sd: take_f(raw, "user_affinity_sd", d.user_affinity_sd)?,
            category_effects: take_effects(raw, "category_effects")?,
            subcategory_effects: take_effects(raw, "subcategory_effects")?,
            hour_effects: take_indexed(raw, "hour_effects", 24)?,
            hour_weights: take_indexed(raw, "hour_weights", 24)?,
            dow_effects: take_indexed(raw, "dow_effects", 7)?,
            dow_weights: take_indexed(raw, "dow_weights", 7)?,
            latent_rank: take_num(raw, "latent_rank", d.latent_rank)?,
            latent_scale: take_f(raw, "latent_scale", d.latent_scale)?,
            noise_sd: take_f(raw, "noise_sd", d.noise_sd)?,
            explicit_prob: take_f(raw, "explicit_prob", d.explicit_prob)?,
            selection_bias: take_f(raw, "selection_bias", d.selection_bias)?,
            popularity_exponent: take_f(raw, "popularity_exponent", d.popularity_exponent)?,
            session_size: take_num(raw, "session_size", d.session_size)?,
            n_weeks: take_num(raw, "n_weeks", d.n_weeks)?,
            base_timestamp: match raw.take(s, "base_timestamp") {
                Some(v) => v.parse().map_err(|_| {
                    Error::Config(format!("{s}.base_timestamp: cannot parse {v:?}"))
                })?,
                None => d.base_timestamp,
            },
            tokens_per_item: take_num(raw, "tokens_per_item", d.tokens_per_item)?,
            vocab_per_category: take_num(raw, "vocab_per_category", d.vocab_per_category)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_users", self.n_users),
            ("n_items", self.n_items),
            ("n_interactions", self.n_interactions),
            ("n_categories", self.n_categories),
            ("subcategories_per_category", self.subcategories_per_category),
            ("session_size", self.session_size),
            ("n_weeks", self.n_weeks),
            ("tokens_per_item", self.tokens_per_item),
            ("vocab_per_category", self.vocab_per_category),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("synthetic.{name} must be at least 1")));
            }
        }
        let non_negative_sd = [
            ("user_bias_sd", self.user_bias_sd),
            ("item_bias_sd", self.item_bias_sd),
            ("user_affinity_sd", self.user_affinity_sd),
            ("latent_scale", self.latent_scale),
            ("noise_sd", self.noise_sd),
            ("popularity_exponent", self.popularity_exponent),
        ];
        for (name, value) in non_negative_sd {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Config(format!(
                    "synthetic.{name} must be non-negative, got {value}"
                )));
            }
        }
        if !self.base_rating.is_finite() {
            return Err(Error::Config("synthetic.base_rating must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.explicit_prob) {
            return Err(Error::Config(format!(
                "synthetic.explicit_prob must be in [0, 1], got {}",
                self.explicit_prob
            )));
        }
        if !self.selection_bias.is_finite() {
            return Err(Error::Config("synthetic.selection_bias must be finite".into()));
        }
        if self.base_timestamp < 0 {
            return Err(Error::Config(format!(
                "synthetic.base_timestamp must be non-negative, got {}",
                self.base_timestamp
            )));
        }
        for (name, pairs) in
            [("hour_weights", &self.hour_weights), ("dow_weights", &self.dow_weights)]
        {
            if pairs.iter().any(|&(_, w)| !(w > 0.0 && w.is_finite())) {
                return Err(Error::Config(format!(
                    "synthetic.{name}: weights must be positive"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn echo_into(&self, out: &mut String) {
        let mut push = |line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        let join = |values: &[f64]| {
            values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        };
        push("\n[synthetic]".to_string());
        push(format!("n_users = {}", self.n_users));
        push(format!("n_items = {}", self.n_items));
        push(format!("n_interactions = {}", self.n_interactions));
        push(format!("n_categories = {}", self.n_categories));
        push(format!("subcategories_per_category = {}", self.subcategories_per_category));
        push(format!("base_rating = {}", self.base_rating));
        push(format!("user_bias_sd = {}", self.user_bias_sd));
        push(format!("item_bias_sd = {}", self.item_bias_sd));
        push(format!("user_affinity_sd = {}", self.user_affinity_sd));
        push(format!("category_effects = {}", join(&self.category_effects)));
        push(format!("subcategory_effects = {}", join(&self.subcategory_effects)));
        push(format!("hour_effects = {}", format_indexed(&self.hour_effects)));
        push(format!("hour_weights = {}", format_indexed(&self.hour_weights)));
        push(format!("dow_effects = {}", format_indexed(&self.dow_effects)));
        push(format!("dow_weights = {}", format_indexed(&self.dow_weights)));
        push(format!("latent_rank = {}", self.latent_rank));
        push(format!("latent_scale = {}", self.latent_scale));
        push(format!("noise_sd = {}", self.noise_sd));
        push(format!("explicit_prob = {}", self.explicit_prob));
        push(format!("selection_bias = {}", self.selection_bias));
        push(format!("popularity_exponent = {}", self.popularity_exponent));
        push(format!("session_size = {}", self.session_size));
        push(format!("n_weeks = {}", self.n_weeks));
        push(format!("base_timestamp = {}", self.base_timestamp));
        push(format!("tokens_per_item = {}", self.tokens_per_item));
        push(format!("vocab_per_category = {}", self.vocab_per_category));
    }

    fn category_of(&self, item: usize) -> usize {
        item % self.n_categories
    }

    fn subcategory_of(&self, item: usize) -> usize {
        (item / self.n_categories) % self.subcategories_per_category
    }

    /// Flattened (category, subcategory) slot index.
    fn subcategory_slot(&self, item: usize) -> usize {
        self.category_of(item) * self.subcategories_per_category + self.subcategory_of(item)
    }
}

/// The parameter draws behind one generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub user_bias: Vec<f64>,
    pub item_bias: Vec<f64>,
    /// Indexed `[user][category]`.
    pub user_affinity: Vec<Vec<f64>>,
    /// Dense per-hour offsets, length 24.
    pub hour_effects: Vec<f64>,
    /// Dense per-day-of-week offsets, length 7 (Monday-based).
    pub dow_effects: Vec<f64>,
    pub category_effects: Vec<f64>,
    /// Flattened `[category * subcategories_per_category + subcategory]`.
    pub subcategory_effects: Vec<f64>,
    pub latent_user: Vec<Vec<f64>>,
    pub latent_item: Vec<Vec<f64>>,
}

impl GroundTruth {
    /// The noise-free rating the generator assigned to `(user, item)` at a
    /// given hour/day-of-week — the oracle generated data is checked
    /// against.
    pub fn expected_rating(
        &self,
        spec: &SynthSpec,
        user: usize,
        item: usize,
        hour: usize,
        dow: usize,
    ) -> f64 {
        let cat = spec.category_of(item);
        let latent: f64 = self.latent_user[user]
            .iter()
            .zip(&self.latent_item[item])
            .map(|(a, b)| a * b)
            .sum();
        spec.base_rating
            + self.user_bias[user]
            + self.item_bias[item]
            + self.category_effects[cat]
            + self.subcategory_effects[spec.subcategory_slot(item)]
            + self.user_affinity[user][cat]
            + self.hour_effects[hour]
            + self.dow_effects[dow]
            + latent
    }
}

fn dense_effects(pairs: &[(usize, f64)], len: usize) -> Vec<f64> {
    let mut dense = vec![0.0; len];
    for &(idx, value) in pairs {
        dense[idx] = value;
    }
    dense
}

fn dense_weights(pairs: &[(usize, f64)], len: usize) -> Vec<f64> {
    let mut dense = vec![1.0; len];
    for &(idx, value) in pairs {
        dense[idx] = value;
    }
    dense
}

fn cycled(effects: &[f64], len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| if effects.is_empty() { 0.0 } else { effects[i % effects.len()] })
        .collect()
}

pub fn user_id_of(user: usize) -> String {
    format!("u{user:04}")
}

pub fn item_id_of(item: usize) -> String {
    format!("i{item:05}")
}

/// Generate a corpus and its ground truth in memory.
///
/// Ratings are clamped to `rating_scale` (declare a wide scale to keep the
/// planted arithmetic exact). The result is a pure function of
/// `(spec, rating_scale, seed)`.
pub fn generate_synthetic(
    spec: &SynthSpec,
    rating_scale: (f64, f64),
    seed: u64,
) -> Result<(Dataset, GroundTruth)> {
    spec.validate()?;
    let (scale_lo, scale_hi) = rating_scale;
    if !(scale_lo.is_finite() && scale_hi.is_finite() && scale_lo < scale_hi) {
        return Err(Error::Config(format!("invalid rating scale ({scale_lo}, {scale_hi})")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Catalog first: category-specific vocabularies make same-category
    // items textually similar, which is what the diversity features see.
    let mut catalog: Catalog = BTreeMap::new();
    for item in 0..spec.n_items {
        let cat = spec.category_of(item);
        let mut tokens: Vec<String> = (0..spec.tokens_per_item)
            .map(|_| format!("t{cat}w{}", rng.gen_range(0..spec.vocab_per_category)))
            .collect();
        let snippet = tokens.split_off(2.min(tokens.len()));
        let item_id = item_id_of(item);
        catalog.insert(
            item_id.clone(),
            NewsItem {
                item_id,
                category: format!("c{cat}"),
                subcategory: format!("c{cat}_s{}", spec.subcategory_of(item)),
                title: tokens.join(" "),
                snippet: snippet.join(" "),
            },
        );
    }

    let draw = |rng: &mut ChaCha8Rng, sd: f64, n: usize| -> Vec<f64> {
        let normal = Normal::new(0.0, sd).expect("validated sd");
        (0..n).map(|_| normal.sample(rng)).collect()
    };
    let user_bias = draw(&mut rng, spec.user_bias_sd, spec.n_users);
    let item_bias = draw(&mut rng, spec.item_bias_sd, spec.n_items);
    let user_affinity: Vec<Vec<f64>> = (0..spec.n_users)
        .map(|_| draw(&mut rng, spec.user_affinity_sd, spec.n_categories))
        .collect();
    let latent_sd = if spec.latent_rank > 0 {
        spec.latent_scale / (spec.latent_rank as f64).sqrt()
    } else {
        0.0
    };
    let latent_user: Vec<Vec<f64>> =
        (0..spec.n_users).map(|_| draw(&mut rng, latent_sd, spec.latent_rank)).collect();
    let latent_item: Vec<Vec<f64>> =
        (0..spec.n_items).map(|_| draw(&mut rng, latent_sd, spec.latent_rank)).collect();

    let truth = GroundTruth {
        user_bias,
        item_bias,
        user_affinity,
        hour_effects: dense_effects(&spec.hour_effects, 24),
        dow_effects: dense_effects(&spec.dow_effects, 7),
        category_effects: cycled(&spec.category_effects, spec.n_categories),
        subcategory_effects: cycled(
            &spec.subcategory_effects,
            spec.n_categories * spec.subcategories_per_category,
        ),
        latent_user,
        latent_item,
    };

    let hour_dist = WeightedIndex::new(dense_weights(&spec.hour_weights, 24))
        .map_err(|e| Error::Config(format!("hour_weights: {e}")))?;
    let dow_dist = WeightedIndex::new(dense_weights(&spec.dow_weights, 7))
        .map_err(|e| Error::Config(format!("dow_weights: {e}")))?;

    // Item choice: popularity times (optionally) an affinity tilt. The
    // per-user distributions are precomputed so sampling order — and hence
    // the byte-level output — never depends on evaluation laziness.
    let popularity: Vec<f64> =
        (0..spec.n_items).map(|i| 1.0 / ((i + 1) as f64).powf(spec.popularity_exponent)).collect();
    let item_dists: Vec<WeightedIndex<f64>> = if spec.selection_bias == 0.0 {
        vec![WeightedIndex::new(&popularity)
            .map_err(|e| Error::Config(format!("item weights: {e}")))?]
    } else {
        (0..spec.n_users)
            .map(|u| {
                let weights: Vec<f64> = (0..spec.n_items)
                    .map(|i| {
                        popularity[i]
                            * (spec.selection_bias * truth.user_affinity[u][spec.category_of(i)])
                                .exp()
                    })
                    .collect();
                WeightedIndex::new(&weights)
                    .map_err(|e| Error::Config(format!("item weights: {e}")))
            })
            .collect::<Result<Vec<_>>>()?
    };

    let noise = Normal::new(0.0, spec.noise_sd).expect("validated sd");
    let mut interactions = Vec::with_capacity(spec.n_interactions);
    for idx in 0..spec.n_interactions {
        let user = idx % spec.n_users;
        let week = rng.gen_range(0..spec.n_weeks) as i64;
        let dow = dow_dist.sample(&mut rng);
        let hour = hour_dist.sample(&mut rng);
        let minute = rng.gen_range(0..60i64);
        let second = rng.gen_range(0..60i64);
        let timestamp = spec.base_timestamp
            + week * SECONDS_PER_WEEK
            + dow as i64 * 86_400
            + hour as i64 * 3_600
            + minute * 60
            + second;
        let dist = &item_dists[if item_dists.len() == 1 { 0 } else { user }];
        let item = dist.sample(&mut rng);
        let explicit = rng.gen::<f64>() < spec.explicit_prob;
        // Noise is drawn unconditionally so the stream stays aligned
        // whether or not the interaction ends up explicit.
        let eps = noise.sample(&mut rng);
        let feedback = if explicit {
            let value = truth.expected_rating(spec, user, item, hour, dow) + eps;
            Feedback::Rating(value.clamp(scale_lo, scale_hi))
        } else {
            Feedback::Click
        };
        interactions.push(Interaction::new(user_id_of(user), item_id_of(item), timestamp, feedback));
    }

    // Explicit session ids: chunk each user's time-ordered interactions.
    let mut order: Vec<usize> = (0..interactions.len()).collect();
    order.sort_by(|&a, &b| {
        (&interactions[a].user_id, interactions[a].timestamp, a)
            .cmp(&(&interactions[b].user_id, interactions[b].timestamp, b))
    });
    let mut position_in_user = 0usize;
    let mut current_user: Option<&str> = None;
    let mut session_ids = vec![String::new(); interactions.len()];
    for &i in &order {
        if current_user != Some(interactions[i].user_id.as_str()) {
            current_user = Some(interactions[i].user_id.as_str());
            position_in_user = 0;
        }
        session_ids[i] = format!("s{}", position_in_user / spec.session_size);
        position_in_user += 1;
    }
    for (inter, sid) in interactions.iter_mut().zip(session_ids) {
        inter.session_id = Some(sid);
    }

    interactions.sort_by(|a, b| {
        (a.timestamp, &a.user_id, &a.item_id).cmp(&(b.timestamp, &b.user_id, &b.item_id))
    });

    let dataset = Dataset {
        catalog,
        interactions,
        rating_scale,
        tally: ParseTally::default(),
    };
    Ok((dataset, truth))
}

/// Serialize interactions in the TSV format `parse_interactions` reads.
pub fn write_interactions_tsv(path: &Path, interactions: &[Interaction]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for inter in interactions {
        let (kind, value) = match inter.feedback {
            Feedback::Rating(v) => ("rating", v.to_string()),
            Feedback::Click => ("click", "-".to_string()),
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            inter.user_id,
            inter.item_id,
            inter.timestamp,
            kind,
            value,
            inter.session_id.as_deref().unwrap_or("")
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Serialize a catalog in the TSV format `parse_catalog` reads.
pub fn write_catalog_tsv(path: &Path, catalog: &Catalog) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in catalog.values() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            item.item_id, item.category, item.subcategory, item.title, item.snippet
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Write `catalog.tsv`, `interactions.tsv`, and `ground_truth.json` into
/// `dir`; returns the three paths.
pub fn write_synthetic(
    dir: &Path,
    dataset: &Dataset,
    truth: &GroundTruth,
) -> Result<(PathBuf, PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let catalog_path = dir.join("catalog.tsv");
    let interactions_path = dir.join("interactions.tsv");
    let truth_path = dir.join("ground_truth.json");
    write_catalog_tsv(&catalog_path, &dataset.catalog)?;
    write_interactions_tsv(&interactions_path, &dataset.interactions)?;
    std::fs::write(&truth_path, serde_json::to_string_pretty(truth)?)?;
    Ok((catalog_path, interactions_path, truth_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{decompose_timestamp, parse_catalog, parse_interactions};
    use std::io::BufReader;

    fn noise_free_spec() -> SynthSpec {
        SynthSpec {
            n_users: 12,
            n_items: 30,
            n_interactions: 400,
            noise_sd: 0.0,
            user_affinity_sd: 0.2,
            hour_effects: vec![(19, 1.0)],
            dow_effects: vec![(5, 0.5)],
            category_effects: vec![0.4, -0.4],
            latent_rank: 2,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn noise_free_ratings_match_the_ground_truth_formula() {
        let spec = noise_free_spec();
        let (dataset, truth) = generate_synthetic(&spec, (0.0, 10.0), 5).unwrap();
        let mut checked = 0;
        for inter in &dataset.interactions {
            let Feedback::Rating(value) = inter.feedback else { continue };
            let user: usize = inter.user_id[1..].parse().unwrap();
            let item: usize = inter.item_id[1..].parse().unwrap();
            let td = decompose_timestamp(inter.timestamp).unwrap();
            let expected = truth.expected_rating(
                &spec,
                user,
                item,
                td.hour as usize,
                td.day_of_week as usize,
            );
            assert_eq!(value, expected.clamp(0.0, 10.0), "interaction {inter:?}");
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn hour_offset_is_visible_in_the_generated_data() {
        // With zero noise, the planted +1.0 at hour 19 shifts that hour's
        // mean rating relative to every other hour.
        let spec = SynthSpec {
            noise_sd: 0.0,
            user_bias_sd: 0.0,
            item_bias_sd: 0.0,
            hour_effects: vec![(19, 1.0)],
            n_interactions: 2_000,
            ..SynthSpec::default()
        };
        let (dataset, _) = generate_synthetic(&spec, (0.0, 10.0), 1).unwrap();
        let mut at_19 = Vec::new();
        let mut elsewhere = Vec::new();
        for inter in &dataset.interactions {
            let Feedback::Rating(value) = inter.feedback else { continue };
            let td = decompose_timestamp(inter.timestamp).unwrap();
            if td.hour == 19 {
                at_19.push(value);
            } else {
                elsewhere.push(value);
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(!at_19.is_empty() && !elsewhere.is_empty());
        assert!((mean(&at_19) - mean(&elsewhere) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn same_spec_and_seed_give_byte_identical_files() {
        let spec = noise_free_spec();
        let dir = tempfile::tempdir().unwrap();
        let (dataset, truth) = generate_synthetic(&spec, (0.0, 10.0), 9).unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        write_synthetic(&a, &dataset, &truth).unwrap();
        let (dataset2, truth2) = generate_synthetic(&spec, (0.0, 10.0), 9).unwrap();
        write_synthetic(&b, &dataset2, &truth2).unwrap();
        for name in ["catalog.tsv", "interactions.tsv", "ground_truth.json"] {
            let left = std::fs::read(a.join(name)).unwrap();
            let right = std::fs::read(b.join(name)).unwrap();
            assert_eq!(left, right, "{name} differs");
        }
        // A different seed changes the data.
        let (dataset3, _) = generate_synthetic(&spec, (0.0, 10.0), 10).unwrap();
        assert_ne!(dataset.interactions, dataset3.interactions);
    }

    #[test]
    fn written_files_parse_back_to_the_same_corpus() {
        let spec = SynthSpec {
            explicit_prob: 0.5,
            ..noise_free_spec()
        };
        let (dataset, truth) = generate_synthetic(&spec, (0.0, 10.0), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (cat_path, inter_path, _) = write_synthetic(dir.path(), &dataset, &truth).unwrap();

        let catalog =
            parse_catalog(BufReader::new(std::fs::File::open(cat_path).unwrap()), false).unwrap();
        let interactions = parse_interactions(
            BufReader::new(std::fs::File::open(inter_path).unwrap()),
            false,
            (0.0, 10.0),
        )
        .unwrap();
        assert_eq!(catalog.tally.bad_lines, 0);
        assert_eq!(interactions.tally.bad_lines, 0);
        assert_eq!(catalog.items, dataset.catalog);
        assert_eq!(interactions.interactions, dataset.interactions);
    }

    #[test]
    fn session_ids_chunk_each_users_timeline() {
        let spec = SynthSpec {
            n_users: 4,
            n_interactions: 64,
            session_size: 3,
            ..SynthSpec::default()
        };
        let (dataset, _) = generate_synthetic(&spec, (0.0, 10.0), 2).unwrap();
        let mut per_user: BTreeMap<&str, Vec<(i64, usize)>> = BTreeMap::new();
        for inter in &dataset.interactions {
            let sid: usize = inter.session_id.as_deref().unwrap()[1..].parse().unwrap();
            per_user.entry(&inter.user_id).or_default().push((inter.timestamp, sid));
        }
        for (_, mut rows) in per_user {
            rows.sort();
            // Session numbers advance every `session_size` interactions and
            // never decrease along the timeline.
            for (pos, &(_, sid)) in rows.iter().enumerate() {
                assert_eq!(sid, pos / 3);
            }
        }
    }

    #[test]
    fn explicit_probability_extremes() {
        let all_ratings =
            generate_synthetic(&SynthSpec::default(), (0.0, 10.0), 1).unwrap().0;
        assert!(all_ratings
            .interactions
            .iter()
            .all(|i| matches!(i.feedback, Feedback::Rating(_))));

        let spec = SynthSpec { explicit_prob: 0.0, ..SynthSpec::default() };
        let all_clicks = generate_synthetic(&spec, (0.0, 10.0), 1).unwrap().0;
        assert!(all_clicks.interactions.iter().all(|i| i.feedback == Feedback::Click));
    }

    #[test]
    fn uniform_popularity_spreads_interactions_evenly() {
        let spec = SynthSpec {
            n_users: 20,
            n_items: 50,
            n_interactions: 20_000,
            popularity_exponent: 0.0,
            ..SynthSpec::default()
        };
        let (dataset, _) = generate_synthetic(&spec, (0.0, 10.0), 4).unwrap();
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for inter in &dataset.interactions {
            *counts.entry(&inter.item_id).or_default() += 1;
        }
        let mean = 20_000.0 / 50.0;
        assert_eq!(counts.len(), 50);
        for (_, count) in counts {
            assert!((count as f64) > mean * 0.5 && (count as f64) < mean * 1.5);
        }
    }

    #[test]
    fn popularity_skew_concentrates_on_the_head() {
        let spec = SynthSpec {
            n_users: 20,
            n_items: 50,
            n_interactions: 10_000,
            popularity_exponent: 1.2,
            ..SynthSpec::default()
        };
        let (dataset, _) = generate_synthetic(&spec, (0.0, 10.0), 4).unwrap();
        let head = item_id_of(0);
        let tail = item_id_of(49);
        let head_count =
            dataset.interactions.iter().filter(|i| i.item_id == head).count();
        let tail_count =
            dataset.interactions.iter().filter(|i| i.item_id == tail).count();
        assert!(
            head_count > 10 * tail_count.max(1),
            "head {head_count} vs tail {tail_count}"
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let zero_users = SynthSpec { n_users: 0, ..SynthSpec::default() };
        assert!(generate_synthetic(&zero_users, (0.0, 10.0), 1).is_err());
        let bad_prob = SynthSpec { explicit_prob: 1.5, ..SynthSpec::default() };
        assert!(generate_synthetic(&bad_prob, (0.0, 10.0), 1).is_err());
        let bad_scale = SynthSpec::default();
        assert!(generate_synthetic(&bad_scale, (5.0, 1.0), 1).is_err());
    }
}
