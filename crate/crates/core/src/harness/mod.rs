//! Paired evaluation runs: corpus loading, prompting, backends, scoring,
//! comparisons and CSV reports.

mod backend;
mod compare;
mod config;
mod corpus;
mod prompt;
mod record;
mod report;
mod run;
mod score;

use std::path::{Path, PathBuf};

use crate::formats::FormatKind;
use crate::scoring::ScoringError;
use crate::stats::StatsError;
use crate::sustainability::SustainabilityError;

pub use backend::{
    Backend, BackendError, GenerateError, Generation, GenerationRequest, HttpBackend, HttpConfig, ReplayBackend,
    DEFAULT_API_KEY_ENV,
};
pub use compare::{compare_formats, model_ids, summarize, Metric, PairedComparison, SummaryRow};
pub use config::HarnessConfig;
pub use corpus::{load_corpus, parse_corpus, CorpusError, TaskInstance};
pub use prompt::{build_prompt, PromptError, PromptTemplate, TemplateSet, DESCRIPTION_SLOT};
pub use record::{
    parse_records, read_records, record_line, strip_fences, write_records, DurationMode, GenerationRecord,
};
pub use report::{
    build_report, emit_report, write_crossings, write_pairs, write_scores, write_summary, write_sweeps, CrossingRow,
    PairRow, Report, ReportOptions, SweepRow, CROSSING_HEADER, PAIRS_HEADER, SUMMARY_HEADER, SWEEP_HEADER,
};
pub use run::{run_paired, OutputLock, RunOptions};
pub use score::{score_records, ScoreOptions, ScoredRecord};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("record line {line}: {message}")]
    RecordFormat { line: usize, message: String },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("replay file has no record for model `{model_id}`, instance `{instance_id}`, format {format}")]
    ReplayMiss {
        model_id: String,
        instance_id: String,
        format: FormatKind,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("record refers to unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("no usable pairs for {metric} between {format_a} and {format_b} (model `{model_id}`)")]
    InsufficientPairs {
        model_id: String,
        format_a: FormatKind,
        format_b: FormatKind,
        metric: Metric,
    },
    #[error("instance `{instance_id}` ({format}): {source}")]
    Emission {
        instance_id: String,
        format: FormatKind,
        source: SustainabilityError,
    },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("config: {0}")]
    Config(String),
    #[error("output directory is in use: {} exists", .0.display())]
    Locked(PathBuf),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
