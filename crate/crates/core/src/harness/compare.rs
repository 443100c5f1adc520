use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::score::ScoredRecord;
use super::HarnessError;
use crate::formats::FormatKind;
use crate::stats::{mean_std, wilcoxon_signed_rank, PairedSample, StatsError, WilcoxonResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Render,
    Syntax,
    Gcs,
    XIntensity,
    Ees,
    GcsEnv,
    NTokens,
    #[serde(rename = "ce_kg")]
    Ce,
    #[serde(rename = "duration_s")]
    Duration,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Render,
        Metric::Syntax,
        Metric::Gcs,
        Metric::XIntensity,
        Metric::Ees,
        Metric::GcsEnv,
        Metric::NTokens,
        Metric::Ce,
        Metric::Duration,
    ];

    /// Metrics compared pairwise across formats by default.
    pub const PAIRED: [Metric; 6] = [
        Metric::Gcs,
        Metric::Ees,
        Metric::GcsEnv,
        Metric::NTokens,
        Metric::Ce,
        Metric::Duration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Render => "render",
            Metric::Syntax => "syntax",
            Metric::Gcs => "gcs",
            Metric::XIntensity => "x_intensity",
            Metric::Ees => "ees",
            Metric::GcsEnv => "gcs_env",
            Metric::NTokens => "n_tokens",
            Metric::Ce => "ce_kg",
            Metric::Duration => "duration_s",
        }
    }

    /// `None` when the record does not define this metric (degenerate records
    /// have no EES).
    pub fn value(self, s: &ScoredRecord) -> Option<f64> {
        match self {
            Metric::Render => Some(f64::from(s.scores.render)),
            Metric::Syntax => Some(s.scores.syntax),
            Metric::Gcs => Some(s.scores.gcs),
            Metric::XIntensity => s.scores.x_intensity,
            Metric::Ees => s.scores.ees,
            Metric::GcsEnv => s.scores.gcs_env,
            Metric::NTokens => Some(s.record.n_tokens as f64),
            Metric::Ce => s.ce_kg,
            Metric::Duration => Some(s.record.duration_s),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedComparison {
    pub model_id: String,
    pub format_a: FormatKind,
    pub format_b: FormatKind,
    pub metric: Metric,
    pub samples: Vec<PairedSample>,
    /// `None` when every difference is zero: no difference to test.
    pub wilcoxon: Option<WilcoxonResult>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub std_a: f64,
    pub std_b: f64,
}

/// Pairs `format_a` and `format_b` records of one model by instance id, in
/// the order `format_a` records appear.
pub fn compare_formats(
    scored: &[ScoredRecord],
    model_id: &str,
    format_a: FormatKind,
    format_b: FormatKind,
    metric: Metric,
    alpha_level: f64,
) -> Result<PairedComparison, HarnessError> {
    let b_values: HashMap<&str, f64> = scored
        .iter()
        .filter(|s| s.record.model_id == model_id && s.record.format == format_b)
        .filter_map(|s| Some((s.record.instance_id.as_str(), metric.value(s)?)))
        .collect();
    let samples: Vec<PairedSample> = scored
        .iter()
        .filter(|s| s.record.model_id == model_id && s.record.format == format_a)
        .filter_map(|s| {
            let a = metric.value(s)?;
            let b = *b_values.get(s.record.instance_id.as_str())?;
            Some(PairedSample {
                instance_id: s.record.instance_id.clone(),
                value_a: a,
                value_b: b,
            })
        })
        .collect();
    let insufficient = || HarnessError::InsufficientPairs {
        model_id: model_id.to_string(),
        format_a,
        format_b,
        metric,
    };
    if samples.is_empty() {
        return Err(insufficient());
    }
    let a: Vec<f64> = samples.iter().map(|p| p.value_a).collect();
    let b: Vec<f64> = samples.iter().map(|p| p.value_b).collect();
    let (mean_a, std_a) = mean_std(&a).map_err(|_| insufficient())?;
    let (mean_b, std_b) = mean_std(&b).map_err(|_| insufficient())?;
    let wilcoxon = match wilcoxon_signed_rank(&samples, alpha_level) {
        Ok(w) => Some(w),
        Err(StatsError::AllZeroDifferences { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(PairedComparison {
        model_id: model_id.to_string(),
        format_a,
        format_b,
        metric,
        samples,
        wilcoxon,
        mean_a,
        mean_b,
        std_a,
        std_b,
    })
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model_id: String,
    pub format: FormatKind,
    pub metric: Metric,
    pub n: usize,
    /// Records where the metric is undefined (degenerate).
    pub excluded: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

/// Models in first-seen order, then formats and metrics in declaration order.
pub fn model_ids(scored: &[ScoredRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in scored {
        if !out.contains(&s.record.model_id) {
            out.push(s.record.model_id.clone());
        }
    }
    out
}

pub fn summarize(scored: &[ScoredRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for model in model_ids(scored) {
        for format in FormatKind::ALL {
            let group: Vec<&ScoredRecord> = scored
                .iter()
                .filter(|s| s.record.model_id == model && s.record.format == format)
                .collect();
            if group.is_empty() {
                continue;
            }
            for metric in Metric::ALL {
                let values: Vec<f64> = group.iter().filter_map(|s| metric.value(s)).collect();
                let stats = mean_std(&values).ok();
                rows.push(SummaryRow {
                    model_id: model.clone(),
                    format,
                    metric,
                    n: values.len(),
                    excluded: group.len() - values.len(),
                    mean: stats.map(|s| s.0),
                    std: stats.map(|s| s.1),
                });
            }
        }
    }
    rows
}
