//! Plain-text experiment configuration.
//!
//! The format is `key = value` lines under `[section]` headers, with `#`
//! starting a full-line comment. Parsing is strict where it protects the
//! user: unknown keys and duplicate keys are errors (no silent typos),
//! while every known key has a default so the empty string is a valid
//! config. [`ExperimentConfig::resolved_text`] renders every effective
//! value back in the same format; the harness writes that echo next to
//! its artifacts so any run is reconstructible from its log alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::diversity_glm::{GlmConfig, RegularizationSpec};
use crate::error::{Error, Result};
use crate::metrics::EvalOptions;
use crate::temporal_mf::{Granularity, MfConfig, DEFAULT_HALF_LIFE_SECONDS};

use super::synth::SynthSpec;

/// Raw parsed config: `(section, key) -> value`, with line numbers kept
/// for error messages. Sections consume their keys via [`RawConfig::take`];
/// whatever remains at [`RawConfig::finish`] is unknown and rejected.
#[derive(Debug, Clone)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(Error::Config(format!(
                        "line {line_no}: unclosed section header {trimmed:?}"
                    )));
                };
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {line_no}: expected `key = value`, got {trimmed:?}"
                )));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {line_no}: empty key")));
            }
            let slot = (section.clone(), key);
            if let Some((first_line, _)) = entries.get(&slot) {
                return Err(Error::Config(format!(
                    "duplicate key {}.{} (lines {first_line} and {line_no})",
                    slot.0, slot.1
                )));
            }
            entries.insert(slot, (line_no, value.trim().to_string()));
        }
        Ok(RawConfig { entries })
    }

    /// Remove and return a key's value; `None` when absent.
    pub fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.entries
            .remove(&(section.to_string(), key.to_string()))
            .map(|(_, value)| value)
    }

    /// Error if any key was never consumed.
    pub fn finish(self) -> Result<()> {
        if self.entries.is_empty() {
            return Ok(());
        }
        let leftovers: Vec<String> = self
            .entries
            .iter()
            .map(|((section, key), (line, _))| {
                if section.is_empty() {
                    format!("{key} (line {line})")
                } else {
                    format!("{section}.{key} (line {line})")
                }
            })
            .collect();
        Err(Error::Config(format!("unknown config keys: {}", leftovers.join(", "))))
    }
}

fn parse_as<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "{section}.{key}: cannot parse {value:?} as {}",
            std::any::type_name::<T>()
        ))
    })
}

fn take_or<T: std::str::FromStr>(
    raw: &mut RawConfig,
    section: &str,
    key: &str,
    default: T,
) -> Result<T> {
    match raw.take(section, key) {
        Some(value) => parse_as(section, key, &value),
        None => Ok(default),
    }
}

fn take_bool(raw: &mut RawConfig, section: &str, key: &str, default: bool) -> Result<bool> {
    match raw.take(section, key).as_deref() {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(other) => Err(Error::Config(format!(
            "{section}.{key}: expected true or false, got {other:?}"
        ))),
    }
}

/// Parse a comma-separated list, e.g. `k = 10,20,50`.
pub fn parse_list<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|part| parse_as(section, key, part.trim()))
        .collect()
}

/// Parse a `+`-joined granularity set; `none` or the empty string is the
/// empty set.
pub fn parse_granularity_set(value: &str) -> Result<BTreeSet<Granularity>> {
    let trimmed = value.trim();
    if trimmed.is_empty() || trimmed == "none" {
        return Ok(BTreeSet::new());
    }
    trimmed.split('+').map(|part| Granularity::parse(part.trim())).collect()
}

/// Render a granularity set in the config syntax.
pub fn format_granularity_set(set: &BTreeSet<Granularity>) -> String {
    if set.is_empty() {
        "none".to_string()
    } else {
        set.iter().map(|g| g.name()).collect::<Vec<_>>().join("+")
    }
}

/// Parse `index:value` pairs, e.g. `hour_effects = 19:1.0,7:0.25`.
pub(crate) fn parse_indexed(
    section: &str,
    key: &str,
    value: &str,
    limit: usize,
) -> Result<Vec<(usize, f64)>> {
    let trimmed = value.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|pair| {
            let Some((idx, val)) = pair.split_once(':') else {
                return Err(Error::Config(format!(
                    "{section}.{key}: expected index:value, got {pair:?}"
                )));
            };
            let idx: usize = parse_as(section, key, idx.trim())?;
            if idx >= limit {
                return Err(Error::Config(format!(
                    "{section}.{key}: index {idx} out of range 0..{limit}"
                )));
            }
            let val: f64 = parse_as(section, key, val.trim())?;
            Ok((idx, val))
        })
        .collect()
}

pub(crate) fn format_indexed(pairs: &[(usize, f64)]) -> String {
    pairs.iter().map(|(i, v)| format!("{i}:{v}")).collect::<Vec<_>>().join(",")
}

fn format_f64_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Which model the pipeline trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    TemporalMf,
    DiversityGlm,
    DecayBaseline,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<ModelKind> {
        match name {
            "temporal-mf" => Ok(ModelKind::TemporalMf),
            "diversity-glm" => Ok(ModelKind::DiversityGlm),
            "decay-baseline" => Ok(ModelKind::DecayBaseline),
            other => Err(Error::Config(format!(
                "unknown model kind {other:?} (expected temporal-mf, diversity-glm, or decay-baseline)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TemporalMf => "temporal-mf",
            ModelKind::DiversityGlm => "diversity-glm",
            ModelKind::DecayBaseline => "decay-baseline",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `[temporal-mf]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct MfSection {
    pub n_factors: usize,
    pub learning_rate: f64,
    pub l2_reg: f64,
    pub epochs: usize,
    pub granularities: BTreeSet<Granularity>,
    pub use_category: bool,
    pub use_subcategory: bool,
    pub init_scale: f64,
}

impl MfSection {
    fn resolve(raw: &mut RawConfig) -> Result<MfSection> {
        let s = "temporal-mf";
        let defaults = MfConfig::default();
        let granularities = match raw.take(s, "granularities") {
            Some(value) => parse_granularity_set(&value)?,
            None => BTreeSet::new(),
        };
        Ok(MfSection {
            n_factors: take_or(raw, s, "n_factors", defaults.n_factors)?,
            learning_rate: take_or(raw, s, "learning_rate", defaults.learning_rate)?,
            l2_reg: take_or(raw, s, "l2_reg", defaults.l2_reg)?,
            epochs: take_or(raw, s, "epochs", defaults.epochs)?,
            granularities,
            use_category: take_bool(raw, s, "use_category", false)?,
            use_subcategory: take_bool(raw, s, "use_subcategory", false)?,
            init_scale: take_or(raw, s, "init_scale", defaults.init_scale)?,
        })
    }

    /// Assemble the trainer config; bounds and seed come from the pipeline,
    /// not the block.
    pub fn to_config(&self, rating_bounds: Option<(f64, f64)>, seed: u64) -> MfConfig {
        MfConfig {
            n_factors: self.n_factors,
            learning_rate: self.learning_rate,
            l2_reg: self.l2_reg,
            epochs: self.epochs,
            granularities: self.granularities.clone(),
            use_category: self.use_category,
            use_subcategory: self.use_subcategory,
            init_scale: self.init_scale,
            rating_bounds,
            seed,
        }
    }
}

/// `[diversity-glm]` block. `mode` is `elastic-net` (using `alpha`) or
/// `lp` (using `p` and `epsilon`); all three knobs are always accepted so
/// a sweep can flip modes without editing the file.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmSection {
    pub n_factors: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub mode: String,
    pub p: f64,
    pub epsilon: f64,
    pub outer_sweeps: usize,
    pub inner_tol: f64,
    pub inner_max_sweeps: usize,
    pub irls_iterations: usize,
    pub init_scale: f64,
    pub damping: f64,
}

impl GlmSection {
    fn resolve(raw: &mut RawConfig) -> Result<GlmSection> {
        let s = "diversity-glm";
        let defaults = GlmConfig::default();
        let mode = raw.take(s, "mode").unwrap_or_else(|| "elastic-net".to_string());
        if mode != "elastic-net" && mode != "lp" {
            return Err(Error::Config(format!(
                "{s}.mode: expected elastic-net or lp, got {mode:?}"
            )));
        }
        Ok(GlmSection {
            n_factors: take_or(raw, s, "n_factors", defaults.n_factors)?,
            lambda: take_or(raw, s, "lambda", 0.1)?,
            alpha: take_or(raw, s, "alpha", 0.5)?,
            mode,
            p: take_or(raw, s, "p", 1.0)?,
            epsilon: take_or(raw, s, "epsilon", 1e-6)?,
            outer_sweeps: take_or(raw, s, "outer_sweeps", defaults.outer_sweeps)?,
            inner_tol: take_or(raw, s, "inner_tol", defaults.inner_tol)?,
            inner_max_sweeps: take_or(raw, s, "inner_max_sweeps", defaults.inner_max_sweeps)?,
            irls_iterations: take_or(raw, s, "irls_iterations", defaults.irls_iterations)?,
            init_scale: take_or(raw, s, "init_scale", defaults.init_scale)?,
            damping: take_or(raw, s, "damping", defaults.damping)?,
        })
    }

    pub fn regularization(&self) -> RegularizationSpec {
        if self.mode == "lp" {
            RegularizationSpec::lp_norm(self.lambda, self.p, self.epsilon)
        } else {
            RegularizationSpec::elastic_net(self.lambda, self.alpha)
        }
    }

    pub fn to_config(&self, rating_bounds: Option<(f64, f64)>, seed: u64) -> GlmConfig {
        GlmConfig {
            n_factors: self.n_factors,
            regularization: self.regularization(),
            outer_sweeps: self.outer_sweeps,
            inner_tol: self.inner_tol,
            inner_max_sweeps: self.inner_max_sweeps,
            irls_iterations: self.irls_iterations,
            init_scale: self.init_scale,
            damping: self.damping,
            rating_bounds,
            seed,
        }
    }
}

/// `[sampling]` block; `seed` empty means "derive from the run seed".
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSection {
    pub implicit: bool,
    pub ratio: usize,
    pub seed: Option<u64>,
}

/// `[evaluation]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSection {
    pub k_values: Vec<usize>,
    pub w: f64,
    pub relevance_threshold: f64,
    pub exclude_train_items: bool,
    pub per_user: bool,
}

/// `[sweep]` block: optional value lists per axis. An absent (or empty)
/// axis is held at the base config's value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSection {
    pub lambda: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    pub n_factors: Option<Vec<usize>>,
    pub granularities: Option<Vec<BTreeSet<Granularity>>>,
    pub w: Option<Vec<f64>>,
    /// Evaluate cells on a tail slice of the train window (last 10% by
    /// time) instead of the test window — the honest mode for tuning.
    pub validation: bool,
}

fn take_axis<T: std::str::FromStr>(
    raw: &mut RawConfig,
    key: &str,
) -> Result<Option<Vec<T>>> {
    match raw.take("sweep", key) {
        None => Ok(None),
        Some(value) if value.trim().is_empty() => Ok(None),
        Some(value) => Ok(Some(parse_list("sweep", key, &value)?)),
    }
}

impl SweepSection {
    fn resolve(raw: &mut RawConfig) -> Result<SweepSection> {
        let granularities = match raw.take("sweep", "granularities") {
            None => None,
            Some(value) if value.trim().is_empty() => None,
            Some(value) => Some(
                value
                    .split(';')
                    .map(parse_granularity_set)
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(SweepSection {
            lambda: take_axis(raw, "lambda")?,
            alpha: take_axis(raw, "alpha")?,
            p: take_axis(raw, "p")?,
            n_factors: take_axis(raw, "n_factors")?,
            granularities,
            w: take_axis(raw, "w")?,
            validation: take_bool(raw, "sweep", "validation", false)?,
        })
    }
}

/// Every knob of a run, fully resolved. One instance covers all commands:
/// each reads the sections it needs, and the echo always contains the
/// complete effective state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub catalog_path: PathBuf,
    pub interactions_path: PathBuf,
    pub rating_min: f64,
    pub rating_max: f64,
    pub header: bool,
    pub gap_seconds: i64,
    pub train_fraction: f64,
    pub model: ModelKind,
    pub mf: MfSection,
    pub glm: GlmSection,
    pub half_life_seconds: f64,
    pub sampling: SamplingSection,
    pub evaluation: EvalSection,
    pub seed: u64,
    pub sweep: SweepSection,
    pub synthetic: SynthSpec,
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<ExperimentConfig> {
        let mut raw = RawConfig::parse(text)?;

        let catalog_path = PathBuf::from(
            raw.take("data", "catalog").unwrap_or_else(|| "catalog.tsv".to_string()),
        );
        let interactions_path = PathBuf::from(
            raw.take("data", "interactions").unwrap_or_else(|| "interactions.tsv".to_string()),
        );
        let rating_min: f64 = take_or(&mut raw, "data", "rating_min", 1.0)?;
        let rating_max: f64 = take_or(&mut raw, "data", "rating_max", 5.0)?;
        if !(rating_min.is_finite() && rating_max.is_finite() && rating_min < rating_max) {
            return Err(Error::Config(format!(
                "data.rating_min/rating_max: invalid scale ({rating_min}, {rating_max})"
            )));
        }
        let header = take_bool(&mut raw, "data", "header", false)?;

        let gap_seconds = take_or(&mut raw, "session", "gap_seconds", 1800)?;
        if gap_seconds < 0 {
            return Err(Error::Config(format!(
                "session.gap_seconds must be non-negative, got {gap_seconds}"
            )));
        }

        let train_fraction = take_or(&mut raw, "split", "train_fraction", 0.8)?;
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split.train_fraction must be in (0, 1), got {train_fraction}"
            )));
        }

        let model = match raw.take("model", "kind") {
            Some(name) => ModelKind::parse(&name)?,
            None => ModelKind::TemporalMf,
        };

        let mf = MfSection::resolve(&mut raw)?;
        let glm = GlmSection::resolve(&mut raw)?;
        let half_life_seconds =
            take_or(&mut raw, "decay-baseline", "half_life_seconds", DEFAULT_HALF_LIFE_SECONDS)?;

        let sampling = SamplingSection {
            implicit: take_bool(&mut raw, "sampling", "implicit", false)?,
            ratio: take_or(&mut raw, "sampling", "ratio", 4)?,
            seed: match raw.take("sampling", "seed") {
                None => None,
                Some(value) if value.trim().is_empty() => None,
                Some(value) => Some(parse_as("sampling", "seed", &value)?),
            },
        };

        let k_values = match raw.take("evaluation", "k_values") {
            Some(value) => parse_list("evaluation", "k_values", &value)?,
            None => vec![10, 20, 50],
        };
        if k_values.is_empty() || k_values.contains(&0) {
            return Err(Error::Config("evaluation.k_values must be positive integers".into()));
        }
        let w = take_or(&mut raw, "evaluation", "w", 0.5)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Config(format!("evaluation.w must be in [0, 1], got {w}")));
        }
        let evaluation = EvalSection {
            k_values,
            w,
            relevance_threshold: take_or(&mut raw, "evaluation", "relevance_threshold", 3.5)?,
            exclude_train_items: take_bool(&mut raw, "evaluation", "exclude_train_items", true)?,
            per_user: take_bool(&mut raw, "evaluation", "per_user", false)?,
        };

        let seed = take_or(&mut raw, "experiment", "seed", 0)?;
        let sweep = SweepSection::resolve(&mut raw)?;
        let synthetic = SynthSpec::resolve(&mut raw)?;

        raw.finish()?;
        Ok(ExperimentConfig {
            catalog_path,
            interactions_path,
            rating_min,
            rating_max,
            header,
            gap_seconds,
            train_fraction,
            model,
            mf,
            glm,
            half_life_seconds,
            sampling,
            evaluation,
            seed,
            sweep,
            synthetic,
        })
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::from_text(&text)
    }

    pub fn rating_scale(&self) -> (f64, f64) {
        (self.rating_min, self.rating_max)
    }

    /// Evaluation options at a given recommendation timestamp.
    pub fn eval_options(&self, rec_timestamp: i64) -> EvalOptions {
        EvalOptions {
            k_values: self.evaluation.k_values.clone(),
            w: self.evaluation.w,
            relevance_threshold: self.evaluation.relevance_threshold,
            exclude_train_items: self.evaluation.exclude_train_items,
            rec_timestamp,
        }
    }

    /// Render every effective value in the config syntax. Parsing the
    /// result reproduces this config exactly.
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };

        push(&mut out, "# resolved configuration: every effective value".to_string());
        push(&mut out, "[data]".to_string());
        push(&mut out, format!("catalog = {}", self.catalog_path.display()));
        push(&mut out, format!("interactions = {}", self.interactions_path.display()));
        push(&mut out, format!("rating_min = {}", self.rating_min));
        push(&mut out, format!("rating_max = {}", self.rating_max));
        push(&mut out, format!("header = {}", self.header));

        push(&mut out, "\n[session]".to_string());
        push(&mut out, format!("gap_seconds = {}", self.gap_seconds));

        push(&mut out, "\n[split]".to_string());
        push(&mut out, format!("train_fraction = {}", self.train_fraction));

        push(&mut out, "\n[model]".to_string());
        push(&mut out, format!("kind = {}", self.model));

        push(&mut out, "\n[temporal-mf]".to_string());
        push(&mut out, format!("n_factors = {}", self.mf.n_factors));
        push(&mut out, format!("learning_rate = {}", self.mf.learning_rate));
        push(&mut out, format!("l2_reg = {}", self.mf.l2_reg));
        push(&mut out, format!("epochs = {}", self.mf.epochs));
        push(
            &mut out,
            format!("granularities = {}", format_granularity_set(&self.mf.granularities)),
        );
        push(&mut out, format!("use_category = {}", self.mf.use_category));
        push(&mut out, format!("use_subcategory = {}", self.mf.use_subcategory));
        push(&mut out, format!("init_scale = {}", self.mf.init_scale));

        push(&mut out, "\n[diversity-glm]".to_string());
        push(&mut out, format!("n_factors = {}", self.glm.n_factors));
        push(&mut out, format!("lambda = {}", self.glm.lambda));
        push(&mut out, format!("alpha = {}", self.glm.alpha));
        push(&mut out, format!("mode = {}", self.glm.mode));
        push(&mut out, format!("p = {}", self.glm.p));
        push(&mut out, format!("epsilon = {}", self.glm.epsilon));
        push(&mut out, format!("outer_sweeps = {}", self.glm.outer_sweeps));
        push(&mut out, format!("inner_tol = {}", self.glm.inner_tol));
        push(&mut out, format!("inner_max_sweeps = {}", self.glm.inner_max_sweeps));
        push(&mut out, format!("irls_iterations = {}", self.glm.irls_iterations));
        push(&mut out, format!("init_scale = {}", self.glm.init_scale));
        push(&mut out, format!("damping = {}", self.glm.damping));

        push(&mut out, "\n[decay-baseline]".to_string());
        push(&mut out, format!("half_life_seconds = {}", self.half_life_seconds));

        push(&mut out, "\n[sampling]".to_string());
        push(&mut out, format!("implicit = {}", self.sampling.implicit));
        push(&mut out, format!("ratio = {}", self.sampling.ratio));
        push(
            &mut out,
            format!(
                "seed = {}",
                self.sampling.seed.map(|s| s.to_string()).unwrap_or_default()
            ),
        );

        push(&mut out, "\n[evaluation]".to_string());
        push(
            &mut out,
            format!(
                "k_values = {}",
                self.evaluation
                    .k_values
                    .iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        );
        push(&mut out, format!("w = {}", self.evaluation.w));
        push(
            &mut out,
            format!("relevance_threshold = {}", self.evaluation.relevance_threshold),
        );
        push(
            &mut out,
            format!("exclude_train_items = {}", self.evaluation.exclude_train_items),
        );
        push(&mut out, format!("per_user = {}", self.evaluation.per_user));

        push(&mut out, "\n[experiment]".to_string());
        push(&mut out, format!("seed = {}", self.seed));

        push(&mut out, "\n[sweep]".to_string());
        let axis = |values: &Option<Vec<f64>>| match values {
            Some(vs) => format_f64_list(vs),
            None => String::new(),
        };
        push(&mut out, format!("lambda = {}", axis(&self.sweep.lambda)));
        push(&mut out, format!("alpha = {}", axis(&self.sweep.alpha)));
        push(&mut out, format!("p = {}", axis(&self.sweep.p)));
        push(
            &mut out,
            format!(
                "n_factors = {}",
                self.sweep
                    .n_factors
                    .as_ref()
                    .map(|vs| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
                    .unwrap_or_default()
            ),
        );
        push(
            &mut out,
            format!(
                "granularities = {}",
                self.sweep
                    .granularities
                    .as_ref()
                    .map(|sets| {
                        sets.iter().map(format_granularity_set).collect::<Vec<_>>().join(";")
                    })
                    .unwrap_or_default()
            ),
        );
        push(&mut out, format!("w = {}", axis(&self.sweep.w)));
        push(&mut out, format!("validation = {}", self.sweep.validation));

        self.synthetic.echo_into(&mut out);
        out
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::from_text("").expect("empty config resolves to defaults")
    }
}

/// Command-line overrides applied after the file is parsed, before the
/// echo — the resolved log always shows what actually ran.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub seed: Option<u64>,
    pub model: Option<ModelKind>,
    pub k_values: Option<Vec<usize>>,
    pub w: Option<f64>,
    pub header: bool,
}

impl CliOverrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(model) = self.model {
            config.model = model;
        }
        if let Some(ks) = &self.k_values {
            if ks.is_empty() || ks.contains(&0) {
                return Err(Error::Config("k values must be positive integers".into()));
            }
            config.evaluation.k_values = ks.clone();
        }
        if let Some(w) = self.w {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Config(format!("w must be in [0, 1], got {w}")));
            }
            config.evaluation.w = w;
        }
        if self.header {
            config.header = true;
        }
        Ok(())
    }
}
