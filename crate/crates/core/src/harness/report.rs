use std::path::Path;

use serde_json::json;

use super::compare::{compare_formats, model_ids, summarize, Metric, PairedComparison, SummaryRow};
use super::score::ScoredRecord;
use super::HarnessError;
use crate::formats::FormatKind;
use crate::scoring::{compare_sweeps, gamma_sweep, ScorePair};
use crate::stats::mean_std;

pub const SUMMARY_HEADER: [&str; 7] = ["model_id", "format", "metric", "n", "excluded", "mean", "std"];
pub const PAIRS_HEADER: [&str; 17] = [
    "model_id",
    "format_a",
    "format_b",
    "metric",
    "n_pairs",
    "mean_a",
    "std_a",
    "mean_b",
    "std_b",
    "w_plus",
    "w_minus",
    "w_statistic",
    "p_value",
    "method",
    "n_effective",
    "zeros_dropped",
    "significant",
];
pub const SWEEP_HEADER: [&str; 4] = ["model_id", "format", "gamma", "gcs_env"];
pub const CROSSING_HEADER: [&str; 5] = ["model_id", "format_a", "format_b", "gamma_star", "sign_changes"];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    /// Format pairs to compare; `None` compares every other format present
    /// against TOON.
    pub pairs: Option<Vec<(FormatKind, FormatKind)>>,
    pub metrics: Vec<Metric>,
    pub steps: usize,
    pub alpha_level: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            pairs: None,
            metrics: Metric::PAIRED.to_vec(),
            steps: 11,
            alpha_level: 0.05,
        }
    }
}

/// One row of `pairs.csv`: a comparison, or a pair with nothing to compare.
#[derive(Debug, Clone, PartialEq)]
pub enum PairRow {
    Compared(PairedComparison),
    Insufficient {
        model_id: String,
        format_a: FormatKind,
        format_b: FormatKind,
        metric: Metric,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model_id: String,
    pub format: FormatKind,
    pub gamma: f64,
    pub gcs_env: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingRow {
    pub model_id: String,
    pub format_a: FormatKind,
    pub format_b: FormatKind,
    pub gamma_star: Option<f64>,
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub summary: Vec<SummaryRow>,
    pub pairs: Vec<PairRow>,
    pub sweeps: Vec<SweepRow>,
    pub crossings: Vec<CrossingRow>,
}

/// Mean GCS and mean EES over the non-degenerate records of one group.
fn aggregate_pair(scored: &[ScoredRecord], model: &str, format: FormatKind) -> Option<ScorePair> {
    let (g, e): (Vec<f64>, Vec<f64>) = scored
        .iter()
        .filter(|s| s.record.model_id == model && s.record.format == format && !s.degenerate)
        .filter_map(|s| Some((s.scores.gcs, s.scores.ees?)))
        .unzip();
    Some(ScorePair {
        gcs: mean_std(&g).ok()?.0,
        ees: mean_std(&e).ok()?.0,
    })
}

fn formats_of(scored: &[ScoredRecord], model: &str) -> Vec<FormatKind> {
    FormatKind::ALL
        .into_iter()
        .filter(|f| {
            scored
                .iter()
                .any(|s| s.record.model_id == model && s.record.format == *f)
        })
        .collect()
}

pub fn build_report(scored: &[ScoredRecord], opts: &ReportOptions) -> Result<Report, HarnessError> {
    let mut report = Report {
        summary: summarize(scored),
        ..Default::default()
    };
    for model in model_ids(scored) {
        let present = formats_of(scored, &model);
        let pairs = match &opts.pairs {
            Some(p) => p.clone(),
            None if present.contains(&FormatKind::Toon) => present
                .iter()
                .filter(|f| **f != FormatKind::Toon)
                .map(|f| (*f, FormatKind::Toon))
                .collect(),
            None => Vec::new(),
        };
        for &(a, b) in &pairs {
            for &metric in &opts.metrics {
                let row = match compare_formats(scored, &model, a, b, metric, opts.alpha_level) {
                    Ok(c) => PairRow::Compared(c),
                    Err(HarnessError::InsufficientPairs {
                        model_id,
                        format_a,
                        format_b,
                        metric,
                    }) => PairRow::Insufficient {
                        model_id,
                        format_a,
                        format_b,
                        metric,
                    },
                    Err(e) => return Err(e),
                };
                report.pairs.push(row);
            }
        }
        for &format in &present {
            if let Some(p) = aggregate_pair(scored, &model, format) {
                for (gamma, gcs_env) in gamma_sweep(p.gcs, p.ees, opts.steps)? {
                    report.sweeps.push(SweepRow {
                        model_id: model.clone(),
                        format,
                        gamma,
                        gcs_env,
                    });
                }
            }
        }
        for &(a, b) in &pairs {
            if let (Some(pa), Some(pb)) = (aggregate_pair(scored, &model, a), aggregate_pair(scored, &model, b)) {
                let cmp = compare_sweeps(pa, pb, opts.steps)?;
                report.crossings.push(CrossingRow {
                    model_id: model.clone(),
                    format_a: a,
                    format_b: b,
                    gamma_star: cmp.crossing,
                    sign_changes: cmp.sign_changes,
                });
            }
        }
    }
    Ok(report)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_csv<const N: usize>(path: &Path, header: [&str; N], rows: Vec<[String; N]>) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let rows = rows
        .iter()
        .map(|r| {
            [
                r.model_id.clone(),
                r.format.to_string(),
                r.metric.to_string(),
                r.n.to_string(),
                r.excluded.to_string(),
                opt(r.mean),
                opt(r.std),
            ]
        })
        .collect();
    write_csv(path, SUMMARY_HEADER, rows)
}

pub fn write_pairs(path: &Path, rows: &[PairRow]) -> Result<(), HarnessError> {
    let rows = rows
        .iter()
        .map(|row| match row {
            PairRow::Compared(c) => {
                let (w_plus, w_minus, w, p, method, n_eff, zeros, sig) = match &c.wilcoxon {
                    Some(w) => (
                        num(w.w_plus),
                        num(w.w_minus),
                        num(w.w_statistic),
                        num(w.p_value),
                        w.method.as_str().to_string(),
                        w.n_effective.to_string(),
                        w.zeros_dropped.to_string(),
                        w.significant.to_string(),
                    ),
                    None => (
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        "no_difference".into(),
                        "0".into(),
                        c.samples.len().to_string(),
                        "false".into(),
                    ),
                };
                [
                    c.model_id.clone(),
                    c.format_a.to_string(),
                    c.format_b.to_string(),
                    c.metric.to_string(),
                    c.samples.len().to_string(),
                    num(c.mean_a),
                    num(c.std_a),
                    num(c.mean_b),
                    num(c.std_b),
                    w_plus,
                    w_minus,
                    w,
                    p,
                    method,
                    n_eff,
                    zeros,
                    sig,
                ]
            }
            PairRow::Insufficient {
                model_id,
                format_a,
                format_b,
                metric,
            } => {
                let mut r: [String; 17] = Default::default();
                r[0] = model_id.clone();
                r[1] = format_a.to_string();
                r[2] = format_b.to_string();
                r[3] = metric.to_string();
                r[4] = "0".into();
                r[13] = "insufficient_pairs".into();
                r[14] = "0".into();
                r[15] = "0".into();
                r[16] = "false".into();
                r
            }
        })
        .collect();
    write_csv(path, PAIRS_HEADER, rows)
}

pub fn write_sweeps(path: &Path, rows: &[SweepRow]) -> Result<(), HarnessError> {
    let rows = rows
        .iter()
        .map(|r| [r.model_id.clone(), r.format.to_string(), num(r.gamma), num(r.gcs_env)])
        .collect();
    write_csv(path, SWEEP_HEADER, rows)
}

pub fn write_crossings(path: &Path, rows: &[CrossingRow]) -> Result<(), HarnessError> {
    let rows = rows
        .iter()
        .map(|r| {
            [
                r.model_id.clone(),
                r.format_a.to_string(),
                r.format_b.to_string(),
                opt(r.gamma_star),
                r.sign_changes.to_string(),
            ]
        })
        .collect();
    write_csv(path, CROSSING_HEADER, rows)
}

/// Writes `summary.csv`, `pairs.csv`, `gamma_sweep.csv` and `gamma_crossing.csv`.
pub fn emit_report(report: &Report, out_dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    write_summary(&out_dir.join("summary.csv"), &report.summary)?;
    write_pairs(&out_dir.join("pairs.csv"), &report.pairs)?;
    write_sweeps(&out_dir.join("gamma_sweep.csv"), &report.sweeps)?;
    write_crossings(&out_dir.join("gamma_crossing.csv"), &report.crossings)
}

/// One JSON object per scored record.
pub fn write_scores(path: &Path, scored: &[ScoredRecord]) -> Result<(), HarnessError> {
    let mut out = String::new();
    for s in scored {
        let line = json!({
            "instance_id": s.record.instance_id,
            "model_id": s.record.model_id,
            "format": s.record.format,
            "render": s.scores.render,
            "syntax": s.scores.syntax,
            "gcs": s.scores.gcs,
            "ce_kg": s.ce_kg,
            "x_intensity": s.scores.x_intensity,
            "ees": s.scores.ees,
            "gcs_env": s.scores.gcs_env,
            "degenerate": s.degenerate,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| HarnessError::io(path, e))
}
