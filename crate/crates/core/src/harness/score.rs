use std::collections::HashMap;

use super::corpus::TaskInstance;
use super::record::GenerationRecord;
use super::HarnessError;
use crate::formats::parse_format;
use crate::scoring::{gcs, gcs_env, syntax_of_parsed, ScoreBundle, ScoreWeights, SyntaxOptions};
use crate::sustainability::{carbon_intensity, ees, estimate_ce, EmissionConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreOptions {
    pub weights: ScoreWeights,
    pub emission: EmissionConfig,
    pub syntax: SyntaxOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRecord {
    pub record: GenerationRecord,
    pub scores: ScoreBundle,
    /// Emissions used for scoring; `None` only for degenerate records
    /// without a measurement.
    pub ce_kg: Option<f64>,
    /// Zero generated tokens: excluded from EES and GCS_env aggregates.
    pub degenerate: bool,
}

pub fn score_records(
    records: &[GenerationRecord],
    corpus: &[TaskInstance],
    opts: &ScoreOptions,
) -> Result<Vec<ScoredRecord>, HarnessError> {
    opts.weights.validate()?;
    opts.emission
        .validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let by_id: HashMap<&str, &TaskInstance> = corpus.iter().map(|t| (t.instance_id.as_str(), t)).collect();
    records
        .iter()
        .map(|r| {
            let task = by_id
                .get(r.instance_id.as_str())
                .ok_or_else(|| HarnessError::UnknownInstance(r.instance_id.clone()))?;
            score_one(r, task, opts)
        })
        .collect()
}

fn score_one(r: &GenerationRecord, task: &TaskInstance, opts: &ScoreOptions) -> Result<ScoredRecord, HarnessError> {
    let (render, syntax) = match (r.failed, parse_format(&r.output_text, r.format)) {
        (false, Ok(parsed)) => (1u8, syntax_of_parsed(&parsed, r.format, &task.expected, opts.syntax)),
        _ => (0, 0.0),
    };
    let g = gcs(f64::from(render), syntax, &opts.weights);
    let degenerate = r.n_tokens == 0;
    let ce = estimate_ce(&r.measurement(), &opts.emission);
    let (ce_kg, x, e, env) = if degenerate {
        (ce.ok(), None, None, None)
    } else {
        let ce = ce.map_err(|source| HarnessError::Emission {
            instance_id: r.instance_id.clone(),
            format: r.format,
            source,
        })?;
        let x = carbon_intensity(ce, r.n_tokens as f64).expect("non-zero tokens");
        let e = ees(x, opts.emission.x_ref);
        (Some(ce), Some(x), Some(e), Some(gcs_env(g, e, opts.weights.gamma)))
    };
    Ok(ScoredRecord {
        record: r.clone(),
        scores: ScoreBundle {
            render,
            syntax,
            gcs: g,
            x_intensity: x,
            ees: e,
            gcs_env: env,
        },
        ce_kg,
        degenerate,
    })
}
