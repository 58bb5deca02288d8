//! Hyperparameter sweeps: a cartesian grid of config patches, one
//! pipeline cell per combination, collected into `sweep.csv`.
//!
//! Each axis patches the knob it names on the active model family, so the
//! grid is validated against the model kind up front (sweeping `alpha`
//! under a temporal model is a config error, not a silently constant
//! axis). Cells run in parallel; cell `i` uses the same derived seed it
//! would get as a standalone run of cell `i`, and rows are written in
//! grid order, so a sweep's artifacts are byte-stable regardless of
//! thread count. A failing cell becomes an `error` row instead of
//! aborting the rest of the grid.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::EvaluationReport;
use crate::temporal_mf::Granularity;

use super::config::{format_granularity_set, ExperimentConfig, ModelKind};
use super::run::{csv_field, execute_cell, load_dataset};

/// One grid point: the axis values it pins (`None` = axis not swept).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub n_factors: Option<usize>,
    pub granularities: Option<BTreeSet<Granularity>>,
    pub w: Option<f64>,
}

/// The expanded grid for one config, with the evaluation mode it runs in.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    lambda: Vec<Option<f64>>,
    alpha: Vec<Option<f64>>,
    p: Vec<Option<f64>>,
    n_factors: Vec<Option<usize>>,
    granularities: Vec<Option<BTreeSet<Granularity>>>,
    w: Vec<Option<f64>>,
    /// Score cells on the tail of the train window instead of the test
    /// window.
    pub validation: bool,
    kind: ModelKind,
}

fn axis<T: Clone>(values: &Option<Vec<T>>) -> Vec<Option<T>> {
    match values {
        Some(v) => v.iter().cloned().map(Some).collect(),
        None => vec![None],
    }
}

impl SweepGrid {
    /// Expand and validate the `[sweep]` block against the model kind.
    pub fn from_config(config: &ExperimentConfig) -> Result<SweepGrid> {
        let sweep = &config.sweep;
        let kind = config.model;
        let reject = |axis: &str, requirement: &str| -> Result<()> {
            Err(Error::Config(format!(
                "sweep.{axis} does not apply to model kind {kind}: it requires {requirement}"
            )))
        };
        match kind {
            ModelKind::TemporalMf => {
                if sweep.alpha.is_some() {
                    reject("alpha", "diversity-glm in elastic-net mode")?;
                }
                if sweep.p.is_some() {
                    reject("p", "diversity-glm in lp mode")?;
                }
            }
            ModelKind::DiversityGlm => {
                if sweep.granularities.is_some() {
                    reject("granularities", "temporal-mf")?;
                }
                if sweep.alpha.is_some() && config.glm.mode != "elastic-net" {
                    reject("alpha", "diversity-glm in elastic-net mode")?;
                }
                if sweep.p.is_some() && config.glm.mode != "lp" {
                    reject("p", "diversity-glm in lp mode")?;
                }
            }
            ModelKind::DecayBaseline => {
                if sweep.lambda.is_some() {
                    reject("lambda", "a trained model kind")?;
                }
                if sweep.alpha.is_some() {
                    reject("alpha", "diversity-glm in elastic-net mode")?;
                }
                if sweep.p.is_some() {
                    reject("p", "diversity-glm in lp mode")?;
                }
                if sweep.n_factors.is_some() {
                    reject("n_factors", "a trained model kind")?;
                }
                if sweep.granularities.is_some() {
                    reject("granularities", "temporal-mf")?;
                }
            }
        }
        Ok(SweepGrid {
            lambda: axis(&sweep.lambda),
            alpha: axis(&sweep.alpha),
            p: axis(&sweep.p),
            n_factors: axis(&sweep.n_factors),
            granularities: axis(&sweep.granularities),
            w: axis(&sweep.w),
            validation: sweep.validation,
            kind,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.lambda.len()
            * self.alpha.len()
            * self.p.len()
            * self.n_factors.len()
            * self.granularities.len()
            * self.w.len()
    }

    /// All cells in row-major order; `lambda` is the outermost axis and
    /// `w` the innermost.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut cells = Vec::with_capacity(self.cell_count());
        for lambda in &self.lambda {
            for alpha in &self.alpha {
                for p in &self.p {
                    for n_factors in &self.n_factors {
                        for granularities in &self.granularities {
                            for w in &self.w {
                                cells.push(SweepCell {
                                    index: cells.len(),
                                    lambda: *lambda,
                                    alpha: *alpha,
                                    p: *p,
                                    n_factors: *n_factors,
                                    granularities: granularities.clone(),
                                    w: *w,
                                });
                            }
                        }
                    }
                }
            }
        }
        cells
    }

    /// The base config with this cell's axis values patched in.
    pub fn apply_cell(&self, config: &ExperimentConfig, cell: &SweepCell) -> ExperimentConfig {
        let mut patched = config.clone();
        if let Some(lambda) = cell.lambda {
            match self.kind {
                ModelKind::TemporalMf => patched.mf.l2_reg = lambda,
                ModelKind::DiversityGlm => patched.glm.lambda = lambda,
                ModelKind::DecayBaseline => unreachable!("rejected by from_config"),
            }
        }
        if let Some(alpha) = cell.alpha {
            patched.glm.alpha = alpha;
        }
        if let Some(p) = cell.p {
            patched.glm.p = p;
        }
        if let Some(n_factors) = cell.n_factors {
            match self.kind {
                ModelKind::TemporalMf => patched.mf.n_factors = n_factors,
                ModelKind::DiversityGlm => patched.glm.n_factors = n_factors,
                ModelKind::DecayBaseline => unreachable!("rejected by from_config"),
            }
        }
        if let Some(granularities) = &cell.granularities {
            patched.mf.granularities = granularities.clone();
        }
        if let Some(w) = cell.w {
            patched.evaluation.w = w;
        }
        patched
    }
}

/// One finished (or failed) cell.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub report: Option<EvaluationReport>,
    /// The failure message when the cell errored; exactly one of `report`
    /// and `error` is set.
    pub error: Option<String>,
    pub out_dir: PathBuf,
}

/// A finished sweep: ordered rows plus the summary CSV they were written
/// to.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub csv_path: PathBuf,
    pub rows: Vec<SweepRow>,
}

fn format_row(config: &ExperimentConfig, row: &SweepRow) -> String {
    let kind = config.model;
    let lambda = match kind {
        ModelKind::TemporalMf => config.mf.l2_reg.to_string(),
        ModelKind::DiversityGlm => config.glm.lambda.to_string(),
        ModelKind::DecayBaseline => String::new(),
    };
    let alpha = if kind == ModelKind::DiversityGlm && config.glm.mode == "elastic-net" {
        config.glm.alpha.to_string()
    } else {
        String::new()
    };
    let p = if kind == ModelKind::DiversityGlm && config.glm.mode == "lp" {
        config.glm.p.to_string()
    } else {
        String::new()
    };
    let n_factors = match kind {
        ModelKind::TemporalMf => config.mf.n_factors.to_string(),
        ModelKind::DiversityGlm => config.glm.n_factors.to_string(),
        ModelKind::DecayBaseline => String::new(),
    };
    let granularities = match kind {
        ModelKind::TemporalMf => format_granularity_set(&config.mf.granularities),
        _ => String::new(),
    };
    let (rmse, f1, diversity, novelty, composite) = match &row.report {
        Some(report) => {
            let primary_k = config.evaluation.k_values[0];
            (
                report.rmse.map(|v| v.to_string()).unwrap_or_default(),
                report.f1[&primary_k].to_string(),
                report.diversity.to_string(),
                report.novelty.to_string(),
                report.composite.to_string(),
            )
        }
        None => Default::default(),
    };
    let error = row.error.as_deref().map(csv_field).unwrap_or_default();
    format!(
        "{},{lambda},{alpha},{p},{n_factors},{granularities},{},{rmse},{f1},{diversity},{novelty},{composite},{error}",
        row.cell.index, config.evaluation.w
    )
}

/// Run the whole grid and write `sweep.csv` into `out_dir`, one row per
/// cell in grid order. Cell artifacts land in `cell_NNNN/` subdirectories.
/// `jobs` caps the worker threads (default: rayon's global pool).
pub fn run_sweep(
    config: &ExperimentConfig,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<SweepOutcome> {
    let grid = SweepGrid::from_config(config)?;
    let dataset = load_dataset(config)?;
    std::fs::create_dir_all(out_dir)?;

    let cells = grid.cells();
    let run_cell = |cell: &SweepCell| -> SweepRow {
        let patched = grid.apply_cell(config, cell);
        let cell_dir = out_dir.join(format!("cell_{:04}", cell.index));
        match execute_cell(&dataset, &patched, cell.index, &cell_dir, grid.validation) {
            Ok(outcome) => SweepRow {
                cell: cell.clone(),
                report: Some(outcome.report),
                error: None,
                out_dir: cell_dir,
            },
            Err(e) => SweepRow {
                cell: cell.clone(),
                report: None,
                error: Some(e.to_string()),
                out_dir: cell_dir,
            },
        }
    };
    let rows: Vec<SweepRow> = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build a {n}-thread pool: {e}")))?;
            pool.install(|| cells.par_iter().map(run_cell).collect())
        }
        None => cells.par_iter().map(run_cell).collect(),
    };

    let csv_path = out_dir.join("sweep.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    writeln!(
        out,
        "cell,lambda,alpha,p,n_factors,granularities,w,rmse,f1,diversity,novelty,composite,error"
    )?;
    for row in &rows {
        let patched = grid.apply_cell(config, &row.cell);
        writeln!(out, "{}", format_row(&patched, row))?;
    }
    out.flush()?;

    Ok(SweepOutcome { csv_path, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::run::run_experiment;
    use crate::experiment::synth::{generate_synthetic, write_synthetic, SynthSpec};

    fn config_from(dir: &Path, body: &str) -> ExperimentConfig {
        let spec = SynthSpec {
            n_users: 15,
            n_items: 30,
            n_interactions: 600,
            ..SynthSpec::default()
        };
        let (dataset, truth) = generate_synthetic(&spec, (1.0, 5.0), 21).unwrap();
        write_synthetic(dir, &dataset, &truth).unwrap();
        let text = format!(
            "[data]\ncatalog = {}\ninteractions = {}\n\n{body}",
            dir.join("catalog.tsv").display(),
            dir.join("interactions.tsv").display(),
        );
        ExperimentConfig::from_text(&text).unwrap()
    }

    #[test]
    fn cells_enumerate_the_grid_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let config = config_from(
            dir.path(),
            "[model]\nkind = diversity-glm\n\n[sweep]\nlambda = 0.1, 1\nalpha = 0, 0.5\n",
        );
        let grid = SweepGrid::from_config(&config).unwrap();
        assert_eq!(grid.cell_count(), 4);
        let cells = grid.cells();
        let seen: Vec<(Option<f64>, Option<f64>)> =
            cells.iter().map(|c| (c.lambda, c.alpha)).collect();
        assert_eq!(
            seen,
            vec![
                (Some(0.1), Some(0.0)),
                (Some(0.1), Some(0.5)),
                (Some(1.0), Some(0.0)),
                (Some(1.0), Some(0.5)),
            ]
        );
        assert_eq!(cells.iter().map(|c| c.index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);

        // The patch lands on the GLM lambda, not the MF weight penalty.
        let patched = grid.apply_cell(&config, &cells[2]);
        assert_eq!(patched.glm.lambda, 1.0);
        assert_eq!(patched.glm.alpha, 0.0);
        assert_eq!(patched.mf.l2_reg, config.mf.l2_reg);
    }

    #[test]
    fn axes_are_validated_against_the_model_kind() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            ("[model]\nkind = temporal-mf\n\n[sweep]\nalpha = 0.5\n", "diversity-glm"),
            ("[model]\nkind = diversity-glm\n\n[sweep]\ngranularities = hour\n", "temporal-mf"),
            ("[model]\nkind = decay-baseline\n\n[sweep]\nlambda = 0.1\n", "trained model"),
            (
                "[model]\nkind = diversity-glm\n\n[diversity-glm]\nmode = elastic-net\n\n[sweep]\np = 1.5\n",
                "lp mode",
            ),
            (
                "[model]\nkind = diversity-glm\n\n[diversity-glm]\nmode = lp\n\n[sweep]\nalpha = 0.5\n",
                "elastic-net mode",
            ),
        ];
        for (body, needle) in cases {
            let config = config_from(dir.path(), body);
            let err = SweepGrid::from_config(&config).unwrap_err().to_string();
            assert!(err.contains(needle), "{body:?} → {err}");
        }
        // w applies to every model kind, including the baseline.
        let config =
            config_from(dir.path(), "[model]\nkind = decay-baseline\n\n[sweep]\nw = 0.2, 0.8\n");
        assert_eq!(SweepGrid::from_config(&config).unwrap().cell_count(), 2);
    }

    #[test]
    fn a_one_cell_sweep_reproduces_the_standalone_run() {
        let dir = tempfile::tempdir().unwrap();
        let sweep_config = config_from(
            dir.path(),
            "[model]\nkind = temporal-mf\n\n[temporal-mf]\nepochs = 3\nn_factors = 4\n\n\
             [sweep]\nlambda = 0.05\n",
        );
        let outcome = run_sweep(&sweep_config, &dir.path().join("sweep"), None).unwrap();
        assert_eq!(outcome.rows.len(), 1);

        let mut run_config = sweep_config.clone();
        run_config.sweep.lambda = None;
        run_config.mf.l2_reg = 0.05;
        run_experiment(&run_config, &dir.path().join("single")).unwrap();

        let from_sweep =
            std::fs::read(dir.path().join("sweep").join("cell_0000").join("report.json")).unwrap();
        let from_run = std::fs::read(dir.path().join("single").join("report.json")).unwrap();
        assert_eq!(from_sweep, from_run);
        let model_sweep =
            std::fs::read(dir.path().join("sweep").join("cell_0000").join("model.json")).unwrap();
        let model_run = std::fs::read(dir.path().join("single").join("model.json")).unwrap();
        assert_eq!(model_sweep, model_run);
    }

    #[test]
    fn failed_cells_become_error_rows_and_the_rest_still_run() {
        let dir = tempfile::tempdir().unwrap();
        let config = config_from(
            dir.path(),
            "[model]\nkind = diversity-glm\n\n[diversity-glm]\nouter_sweeps = 2\nn_factors = 2\n\n\
             [sweep]\nlambda = -1, 0.1\n",
        );
        let outcome = run_sweep(&config, &dir.path().join("out"), None).unwrap();
        assert_eq!(outcome.rows.len(), 2);
        assert!(outcome.rows[0].report.is_none());
        assert!(outcome.rows[0].error.as_deref().unwrap().contains("train"));
        assert!(outcome.rows[1].report.is_some());
        assert!(outcome.rows[1].error.is_none());

        let csv = std::fs::read_to_string(&outcome.csv_path).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("cell,lambda,alpha,p,n_factors,granularities,w,"));
        assert!(lines[1].starts_with("0,-1,"));
        assert!(lines[1].contains("train"));
        assert!(lines[2].starts_with("1,0.1,"));
        assert!(lines[2].ends_with(','), "success rows have an empty error column");
    }

    #[test]
    fn sweep_csv_is_stable_across_reruns_and_thread_counts() {
        let dir = tempfile::tempdir().unwrap();
        let config = config_from(
            dir.path(),
            "[model]\nkind = temporal-mf\n\n[temporal-mf]\nepochs = 2\nn_factors = 2\n\n\
             [sweep]\nlambda = 0.01, 0.1\nn_factors = 2, 4\n",
        );
        let a = run_sweep(&config, &dir.path().join("a"), Some(1)).unwrap();
        let b = run_sweep(&config, &dir.path().join("b"), Some(4)).unwrap();
        assert_eq!(a.rows.len(), 4);
        let left = std::fs::read(&a.csv_path).unwrap();
        let right = std::fs::read(&b.csv_path).unwrap();
        assert_eq!(left, right);
        for idx in 0..4 {
            let name = format!("cell_{idx:04}");
            let report_a = std::fs::read(dir.path().join("a").join(&name).join("report.json")).unwrap();
            let report_b = std::fs::read(dir.path().join("b").join(&name).join("report.json")).unwrap();
            assert_eq!(report_a, report_b, "{name} differs across thread counts");
        }
    }

    #[test]
    fn validation_mode_scores_cells_inside_the_train_window() {
        let dir = tempfile::tempdir().unwrap();
        let base = "[model]\nkind = temporal-mf\n\n[temporal-mf]\nepochs = 2\nn_factors = 2\n\n\
                    [sweep]\nlambda = 0.05\n";
        let test_eval = config_from(dir.path(), base);
        let validation_eval =
            config_from(dir.path(), &format!("{base}validation = true\n"));
        let on_test = run_sweep(&test_eval, &dir.path().join("t"), None).unwrap();
        let on_validation = run_sweep(&validation_eval, &dir.path().join("v"), None).unwrap();
        let report_t = on_test.rows[0].report.as_ref().unwrap();
        let report_v = on_validation.rows[0].report.as_ref().unwrap();
        // Different evaluation windows score different interactions.
        assert_ne!(report_t, report_v);
    }
}
