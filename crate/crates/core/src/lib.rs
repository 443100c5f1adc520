//! Structured-output evaluation with carbon-aware efficiency metrics.
//!
//! A shared [`ValueNode`] model backs the JSON, XML, YAML and TOON adapters.
//! Outputs are scored for renderability and key-value recall, combined into
//! GCS, and blended with the environmental efficiency score into GCS_env.
//! The [`harness`] runs paired per-format evaluations and reports them.

pub mod formats;
pub mod harness;
pub mod scoring;
pub mod stats;
pub mod sustainability;
pub mod toon;
pub mod value;

pub use formats::{parse_format, serialize_format, AdapterError, FormatKind, SerializeError};
pub use scoring::{
    gamma_crossing, gamma_sweep, gcs, gcs_env, render_score, syntax_score, ScoreBundle, ScorePair, ScoreWeights,
    ScoringError,
};
pub use stats::{mean_std, wilcoxon_signed_rank, PairedSample, StatsError, WilcoxonMethod, WilcoxonResult};
pub use sustainability::{
    carbon_intensity, ees, estimate_ce, DecodeMeasurement, EmissionConfig, EmissionMode, SustainabilityError,
};
pub use toon::{parse_toon, serialize_toon, validate_toon, ToonDialect, ToonError, ToonErrorKind};
pub use value::{flatten, normalized_equal, KeyPath, Mapping, Number, ValueNode};
