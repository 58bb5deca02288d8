//! Crate-wide error type. Variants map onto the CLI exit-code contract:
//! config/usage problems, data problems, and training divergence are
//! distinguishable by the caller.

use thiserror::Error;

/// Errors produced by parsing, training, evaluation, and the experiment
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Filesystem or stream failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Invalid configuration: unknown keys, unparsable values, or
    /// inconsistent settings.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid or unusable input data (beyond the per-line tallies kept by
    /// the parsers).
    #[error("data error: {0}")]
    Data(String),

    /// Stochastic training left the finite range and cannot continue.
    #[error("training diverged at epoch {epoch} (last finite loss {last_loss})")]
    Diverged { epoch: usize, last_loss: f64 },

    /// JSON (de)serialization failure for models and reports.
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    /// A pipeline stage failed; wraps the underlying error with the stage
    /// name so harness output can say *where* a run fell over.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in. Stage wrappers
    /// never nest: re-wrapping keeps the innermost stage name.
    pub fn in_stage(self, stage: &'static str) -> Error {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// The root cause, unwrapping any stage label.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// The stage label, if this error carries one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
