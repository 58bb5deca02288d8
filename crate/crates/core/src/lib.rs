//! Recommender toolkit for news interaction logs.
//!
//! The crate covers the full experimental loop: TSV ingestion and
//! sessionization ([`corpus`]), implicit labeling with in-session negative
//! sampling ([`sampling`]), a time-bias matrix-factorization model trained
//! by SGD ([`temporal_mf`]), regularized linear and factorization models
//! built on coordinate descent and IRLS ([`diversity_glm`]), ranking metrics
//! with a diversity/novelty axis ([`metrics`]), and a deterministic
//! experiment harness with config files, sweeps, and a synthetic-data
//! generator ([`experiment`]).
//!
//! Everything downstream of a seed is reproducible: reruns with the same
//! inputs and seed produce byte-identical models and reports.

pub mod corpus;
pub mod diversity_glm;
pub mod error;
pub mod experiment;
pub(crate) mod intern;
pub mod metrics;
pub mod sampling;
pub mod scorer;
pub mod seed;
pub mod temporal_mf;

pub use error::{Error, Result};
