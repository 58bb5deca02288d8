//! Evaluation orchestrator: score candidates, rank, and aggregate metrics
//! over a held-out time window.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    composite_tradeoff, f1_score, intra_list_diversity, novelty_score, precision_at_k, rmse,
    recall_at_k, top_k_by_score, FeatureIndex,
};
use crate::corpus::{Catalog, Feedback, Interaction, ItemId, UserId};
use crate::error::{Error, Result};
use crate::scorer::ItemScorer;

/// Knobs for one evaluation pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Cutoffs for precision/recall/F1. The first entry is the primary
    /// cutoff used for diversity, novelty, and the composite.
    pub k_values: Vec<usize>,
    /// Accuracy weight in the composite trade-off.
    pub w: f64,
    /// Explicit ratings at or above this are relevant; clicks always are.
    pub relevance_threshold: f64,
    /// Drop each user's train-window items from their candidate set.
    pub exclude_train_items: bool,
    /// Timestamp at which ranking scores are computed (typically the split
    /// timestamp: "recommend as of the end of the train window").
    pub rec_timestamp: i64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            k_values: vec![10, 20, 50],
            w: 0.5,
            relevance_threshold: 3.5,
            exclude_train_items: true,
            rec_timestamp: 0,
        }
    }
}

/// Accounting that travels with every report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCounts {
    /// Users with at least one relevant test item (the macro-average base).
    pub evaluated_users: u64,
    /// Test-active users with no relevant items — excluded, not zeroed.
    pub skipped_users: u64,
    /// Distinct test items never seen during training.
    pub cold_start_items: u64,
    /// Recommended items lacking feature vectors during diversity scoring.
    pub missing_feature_items: u64,
    /// Carried over from parsing, so a report is honest about its input.
    pub bad_lines: u64,
    pub unknown_items: u64,
}

/// Aggregate evaluation results. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// RMSE over explicit test ratings; `null` for models that do not
    /// predict ratings or when the test window has no ratings.
    pub rmse: Option<f64>,
    pub precision: BTreeMap<usize, f64>,
    pub recall: BTreeMap<usize, f64>,
    pub f1: BTreeMap<usize, f64>,
    /// Intra-list diversity at the primary cutoff.
    pub diversity: f64,
    /// Novelty at the primary cutoff.
    pub novelty: f64,
    /// `w * f1 + (1 - w) * (diversity + novelty) / 2` at the primary cutoff.
    pub composite: f64,
    pub k_values: Vec<usize>,
    pub w: f64,
    /// How candidate sets were formed, e.g. `"exclude-train-items"`.
    pub candidate_policy: String,
    pub counts: ReportCounts,
}

impl EvaluationReport {
    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<EvaluationReport> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One evaluated user's metrics, for the per-user dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerUserRow {
    pub user_id: UserId,
    pub n_relevant: usize,
    pub n_candidates: usize,
    pub precision: BTreeMap<usize, f64>,
    pub recall: BTreeMap<usize, f64>,
    pub f1: BTreeMap<usize, f64>,
    pub diversity: f64,
    pub novelty: f64,
    pub composite: f64,
}

/// Report plus the per-user rows it was aggregated from.
#[derive(Debug, Clone)]
pub struct EvaluationOutcome {
    pub report: EvaluationReport,
    pub per_user: Vec<PerUserRow>,
}

/// Evaluate a scorer against the test window.
///
/// Ranking metrics are macro-averaged in sorted user order over users with
/// at least one relevant test item; RMSE (when the scorer predicts ratings)
/// covers every explicit test rating. The whole pass is deterministic:
/// rerunning produces an identical report.
pub fn evaluate_run(
    scorer: &dyn ItemScorer,
    catalog: &Catalog,
    train: &[Interaction],
    test: &[Interaction],
    opts: &EvalOptions,
    input_counts: Option<(u64, u64)>,
) -> Result<EvaluationOutcome> {
    if opts.k_values.is_empty() {
        return Err(Error::Config("k_values must not be empty".into()));
    }
    if opts.k_values.iter().any(|&k| k == 0) {
        return Err(Error::Config("k values must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&opts.w) {
        return Err(Error::Config(format!("w must be in [0, 1], got {}", opts.w)));
    }

    let primary_k = opts.k_values[0];
    let k_max = *opts.k_values.iter().max().expect("non-empty");

    // Per-user train histories and the trained-item universe.
    let mut history: BTreeMap<&UserId, BTreeSet<&ItemId>> = BTreeMap::new();
    let mut trained_items: BTreeSet<&ItemId> = BTreeSet::new();
    for inter in train {
        history.entry(&inter.user_id).or_default().insert(&inter.item_id);
        trained_items.insert(&inter.item_id);
    }

    // Relevance judgments from the test window.
    let mut relevant: BTreeMap<&UserId, BTreeSet<&ItemId>> = BTreeMap::new();
    let mut test_users: BTreeSet<&UserId> = BTreeSet::new();
    let mut test_items: BTreeSet<&ItemId> = BTreeSet::new();
    for inter in test {
        test_users.insert(&inter.user_id);
        test_items.insert(&inter.item_id);
        let is_relevant = match inter.feedback {
            Feedback::Click => true,
            Feedback::Rating(v) => v >= opts.relevance_threshold,
        };
        if is_relevant {
            relevant.entry(&inter.user_id).or_default().insert(&inter.item_id);
        }
    }

    let mut counts = ReportCounts {
        cold_start_items: test_items.iter().filter(|i| !trained_items.contains(**i)).count() as u64,
        ..ReportCounts::default()
    };
    if let Some((bad_lines, unknown_items)) = input_counts {
        counts.bad_lines = bad_lines;
        counts.unknown_items = unknown_items;
    }

    // RMSE over explicit test ratings, when scores are on the rating scale.
    let report_rmse = if scorer.predicts_ratings() {
        let pairs: Vec<(f64, f64)> = test
            .iter()
            .filter_map(|inter| {
                inter.feedback.rating().map(|actual| {
                    (actual, scorer.score(&inter.user_id, &inter.item_id, inter.timestamp))
                })
            })
            .collect();
        if pairs.is_empty() {
            None
        } else {
            Some(rmse(&pairs)?)
        }
    } else {
        None
    };

    let feature_index = FeatureIndex::build(catalog);
    let vectors = feature_index.vectorize_catalog(catalog);
    let mut missing_feature_items: BTreeSet<ItemId> = BTreeSet::new();

    let mut per_user: Vec<PerUserRow> = Vec::new();
    for user in &test_users {
        let user_relevant: BTreeSet<ItemId> = match relevant.get(*user) {
            Some(set) if !set.is_empty() => set.iter().map(|s| (*s).clone()).collect(),
            _ => {
                counts.skipped_users += 1;
                continue;
            }
        };
        let seen: BTreeSet<ItemId> = history
            .get(*user)
            .map(|s| s.iter().map(|i| (*i).clone()).collect())
            .unwrap_or_default();

        let scored: Vec<(ItemId, f64)> = catalog
            .keys()
            .filter(|item| !(opts.exclude_train_items && seen.contains(*item)))
            .map(|item| {
                (
                    item.clone(),
                    scorer.score(user, item, opts.rec_timestamp),
                )
            })
            .collect();
        if scored.is_empty() {
            counts.skipped_users += 1;
            continue;
        }
        let (ranked_items, _scores) = top_k_by_score(scored, k_max);

        let mut row = PerUserRow {
            user_id: (*user).clone(),
            n_relevant: user_relevant.len(),
            n_candidates: 0,
            precision: BTreeMap::new(),
            recall: BTreeMap::new(),
            f1: BTreeMap::new(),
            diversity: 0.0,
            novelty: 0.0,
            composite: 0.0,
        };
        row.n_candidates = catalog.len()
            - if opts.exclude_train_items {
                seen.iter().filter(|i| catalog.contains_key(*i)).count()
            } else {
                0
            };
        for &k in &opts.k_values {
            let p = precision_at_k(&ranked_items, &user_relevant, k);
            let r = recall_at_k(&ranked_items, &user_relevant, k)
                .expect("evaluated users have relevant items");
            row.precision.insert(k, p);
            row.recall.insert(k, r);
            row.f1.insert(k, f1_score(p, r));
        }
        let prefix = &ranked_items[..ranked_items.len().min(primary_k)];
        let diversity = intra_list_diversity(prefix, &vectors);
        if diversity.missing_items > 0 {
            for item in prefix {
                if !vectors.contains_key(item) {
                    missing_feature_items.insert(item.clone());
                }
            }
        }
        row.diversity = diversity.value;
        row.novelty = novelty_score(prefix, &seen)?;
        row.composite = composite_tradeoff(row.f1[&primary_k], row.diversity, row.novelty, opts.w);
        per_user.push(row);
    }

    counts.evaluated_users = per_user.len() as u64;
    counts.missing_feature_items = missing_feature_items.len() as u64;

    if per_user.is_empty() {
        return Err(Error::Data(
            "no users with relevant test items; nothing to evaluate".into(),
        ));
    }

    // Macro averages in sorted user order (per_user is already sorted).
    let n = per_user.len() as f64;
    let mut precision = BTreeMap::new();
    let mut recall = BTreeMap::new();
    let mut f1 = BTreeMap::new();
    for &k in &opts.k_values {
        precision.insert(k, per_user.iter().map(|r| r.precision[&k]).sum::<f64>() / n);
        recall.insert(k, per_user.iter().map(|r| r.recall[&k]).sum::<f64>() / n);
        f1.insert(k, per_user.iter().map(|r| r.f1[&k]).sum::<f64>() / n);
    }
    let diversity = per_user.iter().map(|r| r.diversity).sum::<f64>() / n;
    let novelty = per_user.iter().map(|r| r.novelty).sum::<f64>() / n;
    let composite = composite_tradeoff(f1[&primary_k], diversity, novelty, opts.w);

    let report = EvaluationReport {
        rmse: report_rmse,
        precision,
        recall,
        f1,
        diversity,
        novelty,
        composite,
        k_values: opts.k_values.clone(),
        w: opts.w,
        candidate_policy: if opts.exclude_train_items {
            "exclude-train-items".to_string()
        } else {
            "full-catalog".to_string()
        },
        counts,
    };
    Ok(EvaluationOutcome { report, per_user })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NewsItem;

    /// Deterministic stub: fixed per-(user, item) scores, default 0.
    struct TableScorer {
        table: BTreeMap<(String, String), f64>,
        ratings: bool,
    }

    impl ItemScorer for TableScorer {
        fn score(&self, user_id: &str, item_id: &str, _timestamp: i64) -> f64 {
            *self
                .table
                .get(&(user_id.to_string(), item_id.to_string()))
                .unwrap_or(&0.0)
        }

        fn predicts_ratings(&self) -> bool {
            self.ratings
        }
    }

    fn catalog(n: usize) -> Catalog {
        (0..n)
            .map(|i| {
                let id = format!("n{i}");
                (
                    id.clone(),
                    NewsItem {
                        item_id: id,
                        category: format!("cat{}", i % 3),
                        subcategory: String::new(),
                        title: format!("title {i}"),
                        snippet: String::new(),
                    },
                )
            })
            .collect()
    }

    fn click(user: &str, item: &str, ts: i64) -> Interaction {
        Interaction::new(user, item, ts, Feedback::Click)
    }

    fn rating(user: &str, item: &str, ts: i64, v: f64) -> Interaction {
        Interaction::new(user, item, ts, Feedback::Rating(v))
    }

    fn options(ks: &[usize]) -> EvalOptions {
        EvalOptions {
            k_values: ks.to_vec(),
            rec_timestamp: 100,
            ..EvalOptions::default()
        }
    }

    #[test]
    fn hand_computed_two_user_aggregate() {
        let catalog = catalog(6);
        // u1 trained on n0; relevant test items n1, n2. u2 relevant n3.
        let train = vec![click("u1", "n0", 10)];
        let test = vec![
            click("u1", "n1", 200),
            click("u1", "n2", 210),
            click("u2", "n3", 220),
        ];
        // u1's candidates exclude n0. Scores rank n1 first, n5 second.
        let mut table = BTreeMap::new();
        table.insert(("u1".into(), "n1".into()), 5.0);
        table.insert(("u1".into(), "n5".into()), 4.0);
        table.insert(("u2".into(), "n3".into()), 9.0);
        let scorer = TableScorer { table, ratings: false };

        let outcome =
            evaluate_run(&scorer, &catalog, &train, &test, &options(&[2]), Some((3, 1))).unwrap();
        let report = &outcome.report;

        // u1: top-2 = [n1, n5], hits 1: p=0.5, r=1/2. u2: top-2 = [n3, ...], p=0.5, r=1.
        assert!((report.precision[&2] - 0.5).abs() < 1e-12);
        assert!((report.recall[&2] - (0.5 + 1.0) / 2.0).abs() < 1e-12);
        let f1_u1 = f1_score(0.5, 0.5);
        let f1_u2 = f1_score(0.5, 1.0);
        assert!((report.f1[&2] - (f1_u1 + f1_u2) / 2.0).abs() < 1e-12);
        assert_eq!(report.counts.evaluated_users, 2);
        assert_eq!(report.counts.bad_lines, 3);
        assert_eq!(report.counts.unknown_items, 1);
        assert_eq!(report.rmse, None, "scorer does not predict ratings");
        assert_eq!(report.candidate_policy, "exclude-train-items");
    }

    #[test]
    fn train_items_are_excluded_from_candidates() {
        let catalog = catalog(3);
        let train = vec![click("u1", "n0", 10)];
        let test = vec![click("u1", "n1", 200)];
        // n0 scores highest but was trained on: must not be recommended.
        let mut table = BTreeMap::new();
        table.insert(("u1".into(), "n0".into()), 100.0);
        table.insert(("u1".into(), "n1".into()), 1.0);
        let scorer = TableScorer { table, ratings: false };
        let outcome =
            evaluate_run(&scorer, &catalog, &train, &test, &options(&[1]), None).unwrap();
        assert!((outcome.report.precision[&1] - 1.0).abs() < 1e-12, "n1 tops the filtered list");
    }

    #[test]
    fn users_without_relevant_items_are_skipped_but_counted() {
        let catalog = catalog(4);
        let train: Vec<Interaction> = vec![];
        let test = vec![
            rating("u1", "n1", 200, 2.0), // below threshold: not relevant
            click("u2", "n2", 210),
        ];
        let scorer = TableScorer { table: BTreeMap::new(), ratings: false };
        let outcome =
            evaluate_run(&scorer, &catalog, &train, &test, &options(&[2]), None).unwrap();
        assert_eq!(outcome.report.counts.evaluated_users, 1);
        assert_eq!(outcome.report.counts.skipped_users, 1);
    }

    #[test]
    fn rmse_covers_explicit_ratings_when_scorer_predicts_them() {
        let catalog = catalog(3);
        let test = vec![rating("u1", "n0", 200, 4.0), rating("u1", "n1", 210, 2.0), click("u1", "n2", 220)];
        let mut table = BTreeMap::new();
        table.insert(("u1".into(), "n0".into()), 3.0); // error 1
        table.insert(("u1".into(), "n1".into()), 2.0); // error 0
        let scorer = TableScorer { table, ratings: true };
        let outcome =
            evaluate_run(&scorer, &catalog, &[], &test, &options(&[1]), None).unwrap();
        assert!((outcome.report.rmse.unwrap() - 0.5_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cold_start_items_are_counted() {
        let catalog = catalog(4);
        let train = vec![click("u1", "n0", 10)];
        let test = vec![click("u1", "n1", 200), click("u2", "n0", 210), click("u2", "n2", 220)];
        let scorer = TableScorer { table: BTreeMap::new(), ratings: false };
        let outcome =
            evaluate_run(&scorer, &catalog, &train, &test, &options(&[2]), None).unwrap();
        // n1 and n2 never trained; n0 was.
        assert_eq!(outcome.report.counts.cold_start_items, 2);
    }

    #[test]
    fn aggregate_equals_mean_of_per_user_rows() {
        let catalog = catalog(8);
        let train = vec![click("u1", "n0", 10), click("u2", "n1", 10)];
        let test = vec![
            click("u1", "n2", 200),
            click("u1", "n3", 201),
            click("u2", "n4", 202),
            click("u3", "n5", 203),
        ];
        let mut table = BTreeMap::new();
        for (u, i, s) in [("u1", "n2", 3.0), ("u1", "n6", 2.0), ("u2", "n4", 1.0), ("u3", "n7", 9.0)] {
            table.insert((u.to_string(), i.to_string()), s);
        }
        let scorer = TableScorer { table, ratings: false };
        let opts = options(&[3, 5]);
        let outcome = evaluate_run(&scorer, &catalog, &train, &test, &opts, None).unwrap();
        let n = outcome.per_user.len() as f64;
        for &k in &opts.k_values {
            let mean_p: f64 = outcome.per_user.iter().map(|r| r.precision[&k]).sum::<f64>() / n;
            assert!((outcome.report.precision[&k] - mean_p).abs() < 1e-12);
        }
        let mean_div: f64 = outcome.per_user.iter().map(|r| r.diversity).sum::<f64>() / n;
        assert!((outcome.report.diversity - mean_div).abs() < 1e-12);
        // Composite is linear, so the aggregate equals the mean of per-user
        // composites as well.
        let mean_comp: f64 = outcome.per_user.iter().map(|r| r.composite).sum::<f64>() / n;
        assert!((outcome.report.composite - mean_comp).abs() < 1e-12);
    }

    #[test]
    fn report_json_round_trips_and_is_deterministic() {
        let catalog = catalog(5);
        let test = vec![click("u1", "n1", 200), click("u2", "n2", 210)];
        let scorer = TableScorer { table: BTreeMap::new(), ratings: false };
        let opts = options(&[2]);
        let a = evaluate_run(&scorer, &catalog, &[], &test, &opts, Some((1, 2))).unwrap();
        let b = evaluate_run(&scorer, &catalog, &[], &test, &opts, Some((1, 2))).unwrap();
        let json_a = a.report.to_json_pretty().unwrap();
        let json_b = b.report.to_json_pretty().unwrap();
        assert_eq!(json_a, json_b, "byte-identical reports");
        let parsed = EvaluationReport::from_json(&json_a).unwrap();
        assert_eq!(parsed, a.report);
    }

    #[test]
    fn invalid_options_are_config_errors() {
        let catalog = catalog(2);
        let test = vec![click("u1", "n1", 200)];
        let scorer = TableScorer { table: BTreeMap::new(), ratings: false };
        let bad_k = EvalOptions { k_values: vec![], ..options(&[1]) };
        assert!(evaluate_run(&scorer, &catalog, &[], &test, &bad_k, None).is_err());
        let zero_k = EvalOptions { k_values: vec![0], ..options(&[1]) };
        assert!(evaluate_run(&scorer, &catalog, &[], &test, &zero_k, None).is_err());
        let bad_w = EvalOptions { w: 1.5, ..options(&[1]) };
        assert!(evaluate_run(&scorer, &catalog, &[], &test, &bad_w, None).is_err());
    }
}
