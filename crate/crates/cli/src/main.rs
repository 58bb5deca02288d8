//! `newsrec` — drive the experiment pipeline from the shell.
//!
//! Every subcommand reads the same config file (all of them fall back to
//! built-in defaults when `--config` is omitted), prints its result as
//! JSON on stdout (except `report`, which renders a table for humans),
//! and reserves stderr for progress and errors.
//!
//! Exit codes: 0 success, 1 config/usage error, 2 data or I/O error,
//! 3 training divergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use newsrec_core::corpus::{profile_time_series, sessionize, time_based_split, Label};
use newsrec_core::experiment::{
    cell_seed, generate_synthetic, load_dataset, run_experiment, run_sweep,
    write_interactions_tsv, write_synthetic, CliOverrides, ExperimentConfig, ModelKind,
    SavedModel, SweepGrid,
};
use newsrec_core::metrics::{evaluate_run, EvaluationReport};
use newsrec_core::sampling::build_implicit_training;
use newsrec_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "newsrec",
    version,
    about = "Train and evaluate news recommenders on interaction logs"
)]
struct Cli {
    /// Experiment config file (INI-style); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the model kind: temporal-mf, diversity-glm, decay-baseline.
    #[arg(long, global = true)]
    model: Option<String>,

    /// Override the ranking cutoffs (comma-separated, e.g. 5,10,20).
    #[arg(long, global = true)]
    k: Option<String>,

    /// Override the accuracy weight in the composite (0..=1).
    #[arg(long, global = true)]
    w: Option<f64>,

    /// Treat the first line of each input TSV as a header.
    #[arg(long, global = true)]
    header: bool,

    /// Worker threads for sweeps (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the catalog and interaction log and print ingest tallies.
    Ingest,
    /// Print hour/weekday/month activity histograms for the log.
    Profile,
    /// Split the log by time and write train.tsv / test.tsv.
    Split,
    /// Label implicit feedback with sampled negatives; write pairs.tsv.
    Sample,
    /// Train the configured model and write its artifacts.
    Train,
    /// Score a previously trained model against the configured corpus.
    Evaluate {
        /// A model.json written by `train` (or a sweep cell).
        #[arg(long)]
        model_file: PathBuf,
    },
    /// Run the hyperparameter grid from the [sweep] section.
    Sweep,
    /// Generate a synthetic corpus from the [synthetic] section.
    Synth,
    /// Render a stored report.json as a table.
    Report {
        /// Path to a report.json.
        report: PathBuf,
    },
}

/// Print one result block to stdout. A closed pipe (e.g. `| head`) is a
/// normal way for a consumer to stop reading, not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let outcome = writeln!(stdout, "{text}").and_then(|()| stdout.flush());
    match outcome {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => Ok(other?),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = CliOverrides {
        seed: cli.seed,
        model: cli.model.as_deref().map(ModelKind::parse).transpose()?,
        k_values: match &cli.k {
            Some(raw) => Some(
                raw.split(',')
                    .map(|part| {
                        part.trim().parse::<usize>().map_err(|_| {
                            Error::Config(format!("--k: cannot parse {:?}", part.trim()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        },
        w: cli.w,
        header: cli.header,
    };
    overrides.apply(&mut config)?;
    Ok(config)
}

fn cmd_ingest(config: &ExperimentConfig) -> Result<()> {
    let dataset = load_dataset(config)?;
    let ratings = dataset
        .interactions
        .iter()
        .filter(|i| i.feedback.rating().is_some())
        .count();
    let summary = json!({
        "items": dataset.catalog.len(),
        "interactions": dataset.interactions.len(),
        "ratings": ratings,
        "clicks": dataset.interactions.len() - ratings,
        "bad_lines": dataset.tally.bad_lines,
        "unknown_items": dataset.tally.unknown_items,
        "duplicate_items": dataset.tally.duplicate_items,
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn cmd_profile(config: &ExperimentConfig) -> Result<()> {
    let dataset = load_dataset(config)?;
    let profile = profile_time_series(&dataset.interactions);
    emit(&serde_json::to_string_pretty(&profile)?)
}

fn cmd_split(config: &ExperimentConfig, out: &PathBuf) -> Result<()> {
    let dataset = load_dataset(config)?;
    let split = time_based_split(&dataset.interactions, config.train_fraction)
        .map_err(|e| e.in_stage("split"))?;
    std::fs::create_dir_all(out)?;
    let train_path = out.join("train.tsv");
    let test_path = out.join("test.tsv");
    write_interactions_tsv(&train_path, &split.train)?;
    write_interactions_tsv(&test_path, &split.test)?;
    let summary = json!({
        "split_timestamp": split.split_timestamp,
        "train": split.train.len(),
        "test": split.test.len(),
        "train_path": train_path,
        "test_path": test_path,
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn cmd_sample(config: &ExperimentConfig, out: &PathBuf) -> Result<()> {
    let dataset = load_dataset(config)?;
    let split = time_based_split(&dataset.interactions, config.train_fraction)
        .map_err(|e| e.in_stage("split"))?;
    let sessions = sessionize(&split.train, config.gap_seconds);
    let seed = config.sampling.seed.unwrap_or_else(|| cell_seed(config.seed, 0));
    let labeling = build_implicit_training(
        &sessions,
        &split.train,
        config.sampling.ratio,
        seed,
        true,
    );
    std::fs::create_dir_all(out)?;
    let pairs_path = out.join("pairs.tsv");
    let mut body = String::new();
    let mut positives = 0usize;
    for pair in &labeling.pairs {
        let label = match pair.label {
            Label::Positive => {
                positives += 1;
                "positive"
            }
            Label::Negative => "negative",
        };
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            pair.user_id, pair.item_id, pair.timestamp, label, pair.weight
        ));
    }
    std::fs::write(&pairs_path, body)?;
    let summary = json!({
        "pairs": labeling.pairs.len(),
        "positives": positives,
        "negatives": labeling.pairs.len() - positives,
        "sessions": sessions.len(),
        "empty_pool_sessions": labeling.warnings.empty_pool_sessions,
        "replacement_sessions": labeling.warnings.replacement_sessions,
        "pairs_path": pairs_path,
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn cmd_train(config: &ExperimentConfig, out: &PathBuf) -> Result<()> {
    let outcome = run_experiment(config, out)?;
    let summary = json!({
        "model": outcome.model_path,
        "report": outcome.report_path,
        "resolved_config": outcome.resolved_config_path,
        "trace": outcome.trace_path,
        "split_timestamp": outcome.split_timestamp,
        "composite": outcome.report.composite,
        "rmse": outcome.report.rmse,
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn cmd_evaluate(config: &ExperimentConfig, model_file: &PathBuf) -> Result<()> {
    let dataset = load_dataset(config)?;
    let split = time_based_split(&dataset.interactions, config.train_fraction)
        .map_err(|e| e.in_stage("split"))?;
    let model = SavedModel::load(model_file)?;
    let scorer = model.scorer(&dataset.catalog);
    let outcome = evaluate_run(
        &*scorer,
        &dataset.catalog,
        &split.train,
        &split.test,
        &config.eval_options(split.split_timestamp),
        Some((dataset.tally.bad_lines, dataset.tally.unknown_items)),
    )
    .map_err(|e| e.in_stage("evaluate"))?;
    emit(&outcome.report.to_json_pretty()?)
}

fn cmd_sweep(config: &ExperimentConfig, out: &PathBuf, jobs: Option<usize>) -> Result<()> {
    let grid = SweepGrid::from_config(config)?;
    eprintln!("sweep: {} cells", grid.cell_count());
    let outcome = run_sweep(config, out, jobs)?;
    let errors = outcome.rows.iter().filter(|r| r.error.is_some()).count();
    let best = outcome
        .rows
        .iter()
        .filter_map(|row| row.report.as_ref().map(|rep| (row.cell.index, rep.composite)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let summary = json!({
        "cells": outcome.rows.len(),
        "errors": errors,
        "csv": outcome.csv_path,
        "best_cell": best.map(|(idx, _)| idx),
        "best_composite": best.map(|(_, composite)| composite),
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn cmd_synth(config: &ExperimentConfig, out: &PathBuf) -> Result<()> {
    let (dataset, truth) =
        generate_synthetic(&config.synthetic, config.rating_scale(), config.seed)?;
    let (catalog_path, interactions_path, truth_path) =
        write_synthetic(out, &dataset, &truth)?;
    let summary = json!({
        "catalog": catalog_path,
        "interactions": interactions_path,
        "ground_truth": truth_path,
        "items": dataset.catalog.len(),
        "interactions_written": dataset.interactions.len(),
    });
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn cmd_report(path: &PathBuf) -> Result<()> {
    use std::fmt::Write as _;
    let report = EvaluationReport::from_json(&std::fs::read_to_string(path)?)?;
    let primary_k = report.k_values.first().copied().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "candidate policy : {}", report.candidate_policy);
    let _ = writeln!(
        out,
        "users            : {} evaluated, {} skipped (no relevant test items)",
        report.counts.evaluated_users, report.counts.skipped_users
    );
    let _ = writeln!(
        out,
        "input quality    : {} bad lines, {} unknown items, {} cold-start items",
        report.counts.bad_lines, report.counts.unknown_items, report.counts.cold_start_items
    );
    let _ = match report.rmse {
        Some(rmse) => writeln!(out, "rmse             : {rmse:.4}"),
        None => writeln!(out, "rmse             : n/a (model does not predict ratings)"),
    };
    let _ = writeln!(out);
    let _ = writeln!(out, "{:>6}  {:>10}  {:>10}  {:>10}", "k", "precision", "recall", "f1");
    for k in &report.k_values {
        let _ = writeln!(
            out,
            "{:>6}  {:>10.4}  {:>10.4}  {:>10.4}",
            k, report.precision[k], report.recall[k], report.f1[k]
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "diversity @{primary_k}    : {:.4}", report.diversity);
    let _ = writeln!(out, "novelty   @{primary_k}    : {:.4}", report.novelty);
    let _ = write!(out, "composite (w={}) : {:.4}", report.w, report.composite);
    emit(&out)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Report { report } => cmd_report(report),
        command => {
            let config = load_config(cli)?;
            match command {
                Command::Ingest => cmd_ingest(&config),
                Command::Profile => cmd_profile(&config),
                Command::Split => cmd_split(&config, &cli.out),
                Command::Sample => cmd_sample(&config, &cli.out),
                Command::Train => cmd_train(&config, &cli.out),
                Command::Evaluate { model_file } => cmd_evaluate(&config, model_file),
                Command::Sweep => cmd_sweep(&config, &cli.out, cli.jobs),
                Command::Synth => cmd_synth(&config, &cli.out),
                Command::Report { .. } => unreachable!("handled above"),
            }
        }
    }
}

fn exit_code(error: &Error) -> u8 {
    match error.root() {
        Error::Config(_) => 1,
        Error::Io(_) | Error::Data(_) | Error::Json(_) => 2,
        Error::Diverged { .. } => 3,
        // `root()` never returns a Stage wrapper.
        Error::Stage { .. } => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are "errors" to clap but successes to us;
            // real usage errors share the config exit code.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
