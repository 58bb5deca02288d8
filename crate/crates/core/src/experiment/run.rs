//! The end-to-end pipeline: ingest → split → (sessionize → sample) →
//! train → evaluate → write artifacts.
//!
//! Every run is a "cell": its seed is derived from the global seed plus a
//! cell index, so a standalone run and cell 0 of a sweep are the same
//! computation producing byte-identical artifacts. Stage failures are
//! tagged with the stage name, and a failed cell removes whatever partial
//! files it had already written.

use std::fs::File;
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    parse_catalog, parse_interactions, sessionize, time_based_split, Catalog, Dataset,
};
use crate::diversity_glm::{train_als, GlmExample, GlmModel, GlmScorer};
use crate::error::Result;
use crate::metrics::{evaluate_run, EvaluationReport, PerUserRow};
use crate::sampling::{build_implicit_training, SamplingWarnings};
use crate::seed::derive_seed;
use crate::temporal_mf::{
    train_decay, train_sgd, DecayModel, MfModel, MfScorer, TrainExample,
};

use super::config::{ExperimentConfig, ModelKind};

/// Seed for one grid cell. Standalone runs are cell 0, so a 1×1 sweep and
/// a plain run train the same model.
pub fn cell_seed(global_seed: u64, cell_index: usize) -> u64 {
    derive_seed(global_seed, &["cell", &cell_index.to_string()])
}

/// A trained model of any family, tagged for storage as `model.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SavedModel {
    TemporalMf { model: MfModel },
    DiversityGlm { model: GlmModel },
    DecayBaseline { model: DecayModel },
}

impl SavedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            SavedModel::TemporalMf { .. } => ModelKind::TemporalMf,
            SavedModel::DiversityGlm { .. } => ModelKind::DiversityGlm,
            SavedModel::DecayBaseline { .. } => ModelKind::DecayBaseline,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SavedModel> {
        let mut loaded: SavedModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        match &mut loaded {
            SavedModel::TemporalMf { model } => model.reindex(),
            SavedModel::DiversityGlm { model } => model.reindex(),
            SavedModel::DecayBaseline { .. } => {}
        }
        Ok(loaded)
    }

    /// Borrow the model as a ranking scorer.
    pub fn scorer<'a>(&'a self, catalog: &'a Catalog) -> Box<dyn crate::scorer::ItemScorer + 'a> {
        match self {
            SavedModel::TemporalMf { model } => Box::new(MfScorer { model, catalog }),
            SavedModel::DiversityGlm { model } => Box::new(GlmScorer { model }),
            SavedModel::DecayBaseline { model } => Box::new(model),
        }
    }
}

/// Everything a finished run produced, with the paths it was written to.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: EvaluationReport,
    pub per_user: Vec<PerUserRow>,
    pub model_path: PathBuf,
    pub report_path: PathBuf,
    pub resolved_config_path: PathBuf,
    pub split_timestamp: i64,
    /// Present only for implicit-feedback runs.
    pub warnings: Option<SamplingWarnings>,
    /// Loss/objective trace CSV; absent for the decay baseline.
    pub trace_path: Option<PathBuf>,
    pub per_user_path: Option<PathBuf>,
}

/// Read and assemble the corpus named by the config.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let ingest = || -> Result<Dataset> {
        let catalog = parse_catalog(
            BufReader::new(File::open(&config.catalog_path)?),
            config.header,
        )?;
        let interactions = parse_interactions(
            BufReader::new(File::open(&config.interactions_path)?),
            config.header,
            config.rating_scale(),
        )?;
        Ok(Dataset::assemble(catalog, interactions, config.rating_scale()))
    };
    ingest().map_err(|e| e.in_stage("ingest"))
}

pub(crate) fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn write_per_user_csv(path: &Path, rows: &[PerUserRow], k_values: &[usize]) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    let mut header = String::from("user_id,n_relevant,n_candidates");
    for metric in ["precision", "recall", "f1"] {
        for k in k_values {
            header.push_str(&format!(",{metric}@{k}"));
        }
    }
    header.push_str(",diversity,novelty,composite");
    writeln!(out, "{header}")?;
    for row in rows {
        let mut line = format!(
            "{},{},{}",
            csv_field(&row.user_id),
            row.n_relevant,
            row.n_candidates
        );
        for map in [&row.precision, &row.recall, &row.f1] {
            for k in k_values {
                line.push_str(&format!(",{}", map[k]));
            }
        }
        line.push_str(&format!(",{},{},{}", row.diversity, row.novelty, row.composite));
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Run one pipeline cell against an already-loaded dataset.
///
/// With `eval_on_validation` the train window is split once more and the
/// model is scored on its tail — tuning never reads the test window.
pub(crate) fn execute_cell(
    dataset: &Dataset,
    config: &ExperimentConfig,
    cell_index: usize,
    out_dir: &Path,
    eval_on_validation: bool,
) -> Result<ExperimentOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = execute_cell_inner(
        dataset,
        config,
        cell_index,
        out_dir,
        eval_on_validation,
        &mut written,
    );
    if result.is_err() {
        for path in written {
            let _ = std::fs::remove_file(path);
        }
    }
    result
}

fn execute_cell_inner(
    dataset: &Dataset,
    config: &ExperimentConfig,
    cell_index: usize,
    out_dir: &Path,
    eval_on_validation: bool,
    written: &mut Vec<PathBuf>,
) -> Result<ExperimentOutcome> {
    let effective_seed = cell_seed(config.seed, cell_index);
    let scale = config.rating_scale();

    let outer = time_based_split(&dataset.interactions, config.train_fraction)
        .map_err(|e| e.in_stage("split"))?;
    // Either (train = outer train, eval = outer test) or, for validation
    // scoring, an inner split of the outer train window.
    let (train, eval_set, rec_timestamp, split_timestamp) = if eval_on_validation {
        let inner = time_based_split(&outer.train, 0.9).map_err(|e| e.in_stage("split"))?;
        (inner.train, inner.test, inner.split_timestamp, inner.split_timestamp)
    } else {
        (outer.train, outer.test, outer.split_timestamp, outer.split_timestamp)
    };

    let (implicit_pairs, warnings) = if config.sampling.implicit {
        let sessions = sessionize(&train, config.gap_seconds);
        let labeling = build_implicit_training(
            &sessions,
            &train,
            config.sampling.ratio,
            config.sampling.seed.unwrap_or(effective_seed),
            true,
        );
        (Some(labeling.pairs), Some(labeling.warnings))
    } else {
        (None, None)
    };
    // Implicit targets are 0/1 scores, not ratings: no bounds, no RMSE.
    let rating_bounds = if config.sampling.implicit { None } else { Some(scale) };

    let model_path = out_dir.join("model.json");
    let mut trace_path = None;
    let train_stage = || -> Result<(SavedModel, Option<(PathBuf, String)>)> {
        match config.model {
            ModelKind::TemporalMf => {
                let examples = match &implicit_pairs {
                    Some(pairs) => TrainExample::from_labeled(pairs),
                    None => TrainExample::from_ratings(&train),
                };
                let mf_config = config.mf.to_config(rating_bounds, effective_seed);
                let model = train_sgd(&mf_config, &examples, &dataset.catalog)?;
                let mut csv = String::from("epoch,loss\n");
                for (epoch, loss) in model.loss_trace.iter().enumerate() {
                    csv.push_str(&format!("{},{}\n", epoch + 1, loss));
                }
                let path = out_dir.join("loss_trace.csv");
                Ok((SavedModel::TemporalMf { model }, Some((path, csv))))
            }
            ModelKind::DiversityGlm => {
                let examples = match &implicit_pairs {
                    Some(pairs) => pairs
                        .iter()
                        .map(|p| GlmExample {
                            user_id: p.user_id.clone(),
                            item_id: p.item_id.clone(),
                            target: match p.label {
                                crate::corpus::Label::Positive => 1.0,
                                crate::corpus::Label::Negative => 0.0,
                            },
                        })
                        .collect(),
                    None => GlmExample::from_ratings(&train),
                };
                let glm_config = config.glm.to_config(rating_bounds, effective_seed);
                let model = train_als(&glm_config, &examples)?;
                let mut csv = String::from("sweep,objective\n");
                for (sweep, objective) in model.objective_trace.iter().enumerate() {
                    csv.push_str(&format!("{sweep},{objective}\n"));
                }
                let path = out_dir.join("objective_trace.csv");
                Ok((SavedModel::DiversityGlm { model }, Some((path, csv))))
            }
            ModelKind::DecayBaseline => {
                let model = train_decay(&train, rec_timestamp, config.half_life_seconds)?;
                Ok((SavedModel::DecayBaseline { model }, None))
            }
        }
    };
    let (model, trace) = train_stage().map_err(|e| e.in_stage("train"))?;

    let scorer = model.scorer(&dataset.catalog);
    let outcome = evaluate_run(
        &*scorer,
        &dataset.catalog,
        &train,
        &eval_set,
        &config.eval_options(rec_timestamp),
        Some((dataset.tally.bad_lines, dataset.tally.unknown_items)),
    )
    .map_err(|e| e.in_stage("evaluate"))?;
    drop(scorer);

    let mut write_stage = |written: &mut Vec<PathBuf>| -> Result<(PathBuf, PathBuf, Option<PathBuf>)> {
        model.save(&model_path)?;
        written.push(model_path.clone());
        if let Some((path, csv)) = &trace {
            std::fs::write(path, csv)?;
            written.push(path.clone());
            trace_path = Some(path.clone());
        }
        let report_path = out_dir.join("report.json");
        std::fs::write(&report_path, outcome.report.to_json_pretty()?)?;
        written.push(report_path.clone());
        let resolved_config_path = out_dir.join("resolved.cfg");
        std::fs::write(&resolved_config_path, config.resolved_text())?;
        written.push(resolved_config_path.clone());
        let per_user_path = if config.evaluation.per_user {
            let path = out_dir.join("per_user.csv");
            write_per_user_csv(&path, &outcome.per_user, &config.evaluation.k_values)?;
            written.push(path.clone());
            Some(path)
        } else {
            None
        };
        Ok((report_path, resolved_config_path, per_user_path))
    };
    let (report_path, resolved_config_path, per_user_path) =
        write_stage(written).map_err(|e| e.in_stage("write"))?;

    Ok(ExperimentOutcome {
        report: outcome.report,
        per_user: outcome.per_user,
        model_path,
        report_path,
        resolved_config_path,
        split_timestamp,
        warnings,
        trace_path,
        per_user_path,
    })
}

/// Load the corpus and run the full pipeline once, writing `model.json`,
/// `report.json`, `resolved.cfg`, and (model permitting) a training trace
/// into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    let dataset = load_dataset(config)?;
    execute_cell(&dataset, config, 0, out_dir, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::experiment::synth::{generate_synthetic, write_synthetic, SynthSpec};

    fn synth_config(dir: &Path, extra: &str) -> ExperimentConfig {
        let spec = SynthSpec {
            n_users: 20,
            n_items: 40,
            n_interactions: 900,
            ..SynthSpec::default()
        };
        let (dataset, truth) = generate_synthetic(&spec, (1.0, 5.0), 11).unwrap();
        write_synthetic(dir, &dataset, &truth).unwrap();
        let text = format!(
            "[data]\ncatalog = {}\ninteractions = {}\n\n[model]\nkind = temporal-mf\n\n\
             [temporal-mf]\nepochs = 4\nn_factors = 4\n{extra}",
            dir.join("catalog.tsv").display(),
            dir.join("interactions.tsv").display(),
        );
        ExperimentConfig::from_text(&text).unwrap()
    }

    #[test]
    fn run_writes_all_artifacts_and_they_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let config = synth_config(dir.path(), "[evaluation]\nper_user = true\n");
        let out = dir.path().join("out");
        let outcome = run_experiment(&config, &out).unwrap();

        assert!(outcome.report.rmse.is_some());
        let loaded = SavedModel::load(&outcome.model_path).unwrap();
        assert_eq!(loaded.kind(), ModelKind::TemporalMf);
        // The tag is part of the stored format.
        let raw = std::fs::read_to_string(&outcome.model_path).unwrap();
        assert!(raw.contains("\"kind\": \"temporal-mf\""));

        let report =
            EvaluationReport::from_json(&std::fs::read_to_string(&outcome.report_path).unwrap())
                .unwrap();
        assert_eq!(report, outcome.report);

        // The resolved config echo parses back to the same config.
        let echoed = std::fs::read_to_string(&outcome.resolved_config_path).unwrap();
        assert_eq!(ExperimentConfig::from_text(&echoed).unwrap(), config);

        let trace = std::fs::read_to_string(outcome.trace_path.unwrap()).unwrap();
        assert!(trace.starts_with("epoch,loss\n"));
        assert_eq!(trace.lines().count(), 4 + 1);

        let per_user = std::fs::read_to_string(outcome.per_user_path.unwrap()).unwrap();
        assert!(per_user.starts_with("user_id,n_relevant,n_candidates,precision@10"));
        assert_eq!(per_user.lines().count(), outcome.per_user.len() + 1);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let config = synth_config(dir.path(), "");
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        run_experiment(&config, &out_a).unwrap();
        run_experiment(&config, &out_b).unwrap();
        for name in ["model.json", "report.json", "resolved.cfg", "loss_trace.csv"] {
            let left = std::fs::read(out_a.join(name)).unwrap();
            let right = std::fs::read(out_b.join(name)).unwrap();
            assert_eq!(left, right, "{name} differs between reruns");
        }
    }

    #[test]
    fn decay_baseline_has_no_rmse_and_no_trace() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = synth_config(dir.path(), "");
        config.model = ModelKind::DecayBaseline;
        let outcome = run_experiment(&config, &dir.path().join("out")).unwrap();
        assert!(outcome.report.rmse.is_none());
        assert!(outcome.trace_path.is_none());
        let loaded = SavedModel::load(&outcome.model_path).unwrap();
        assert_eq!(loaded.kind(), ModelKind::DecayBaseline);
    }

    #[test]
    fn implicit_sampling_trains_on_clicks() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            n_users: 15,
            n_items: 40,
            n_interactions: 600,
            explicit_prob: 0.0,
            ..SynthSpec::default()
        };
        let (dataset, truth) = generate_synthetic(&spec, (1.0, 5.0), 3).unwrap();
        write_synthetic(dir.path(), &dataset, &truth).unwrap();
        let text = format!(
            "[data]\ncatalog = {}\ninteractions = {}\n\n[model]\nkind = temporal-mf\n\n\
             [temporal-mf]\nepochs = 3\nn_factors = 4\n\n[sampling]\nimplicit = true\n",
            dir.path().join("catalog.tsv").display(),
            dir.path().join("interactions.tsv").display(),
        );
        let config = ExperimentConfig::from_text(&text).unwrap();
        let outcome = run_experiment(&config, &dir.path().join("out")).unwrap();
        // Click targets are not on the rating scale, so no RMSE is reported.
        assert!(outcome.report.rmse.is_none());
        assert!(outcome.warnings.is_some());
    }

    #[test]
    fn failed_runs_are_tagged_and_leave_no_partial_files() {
        let dir = tempfile::tempdir().unwrap();
        // A huge learning rate makes SGD blow up mid-training.
        let config = synth_config(dir.path(), "learning_rate = 1000\n");
        let out = dir.path().join("out");
        let err = run_experiment(&config, &out).unwrap_err();
        assert_eq!(err.stage(), Some("train"));
        assert!(matches!(err.root(), Error::Diverged { .. }));
        let leftovers: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
        assert!(leftovers.is_empty(), "partial artifacts left behind: {leftovers:?}");
    }

    #[test]
    fn missing_input_files_fail_in_the_ingest_stage() {
        let config = ExperimentConfig::from_text("[data]\ncatalog = /nonexistent/c.tsv\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = run_experiment(&config, dir.path()).unwrap_err();
        assert_eq!(err.stage(), Some("ingest"));
    }

    #[test]
    fn cell_seed_is_stable_and_index_sensitive() {
        assert_eq!(cell_seed(7, 0), cell_seed(7, 0));
        assert_ne!(cell_seed(7, 0), cell_seed(7, 1));
        assert_ne!(cell_seed(7, 0), cell_seed(8, 0));
    }
}
