//! Reproducible experiment harness: config files, the staged pipeline,
//! hyperparameter sweeps, and a synthetic-data generator.
//!
//! Every run is a pure function of (config, data, seed). Configs are
//! plain-text `key = value` files with `[section]` headers; unknown keys
//! are errors, every key has a default, and the harness echoes every
//! effective value to a resolved-config log so any run can be
//! reconstructed from its artifacts alone.

mod config;
mod run;
mod sweep;
mod synth;

pub use config::{CliOverrides, ExperimentConfig, ModelKind, RawConfig};
pub use run::{cell_seed, load_dataset, run_experiment, ExperimentOutcome, SavedModel};
pub use sweep::{run_sweep, SweepCell, SweepGrid, SweepOutcome, SweepRow};
pub use synth::{
    generate_synthetic, write_catalog_tsv, write_interactions_tsv, write_synthetic, GroundTruth,
    SynthSpec,
};
