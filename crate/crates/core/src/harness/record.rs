use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::formats::FormatKind;
use crate::sustainability::DecodeMeasurement;

/// What `duration_s` measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationMode {
    /// Whole request wall time.
    Roundtrip,
    /// First to last generated token.
    Decode,
}

/// One model output. Serialized as one line of the record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationRecord {
    pub instance_id: String,
    pub model_id: String,
    pub format: FormatKind,
    pub prompt: String,
    pub output_text: String,
    pub n_tokens: u64,
    pub duration_s: f64,
    pub duration_mode: DurationMode,
    pub energy_kwh: Option<f64>,
    pub ce_kg: Option<f64>,
    pub fence_stripped: bool,
    pub failed: bool,
    pub timestamp: DateTime<Utc>,
}

impl GenerationRecord {
    pub fn measurement(&self) -> DecodeMeasurement {
        DecodeMeasurement {
            n_tokens: self.n_tokens,
            duration_s: self.duration_s,
            energy_kwh: self.energy_kwh,
            ce_kg: self.ce_kg,
        }
    }

    pub fn key(&self) -> (&str, &str, FormatKind) {
        (&self.model_id, &self.instance_id, self.format)
    }
}

/// Removes a surrounding triple-backtick fence (with optional language tag).
/// Returns the inner text and whether a fence was found.
pub fn strip_fences(text: &str) -> (String, bool) {
    let trimmed = text.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return (text.to_string(), false);
    };
    let body = match rest.find('\n') {
        Some(nl) if !rest[..nl].contains('`') => &rest[nl + 1..],
        _ => return (text.to_string(), false),
    };
    let body = body.strip_suffix("```").unwrap_or(body);
    let body = body.strip_suffix('\n').unwrap_or(body);
    let body = body.strip_suffix('\r').unwrap_or(body);
    (body.to_string(), true)
}

pub fn parse_records(text: &str) -> Result<Vec<GenerationRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::RecordFormat {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<GenerationRecord>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_records(&text)
}

pub fn record_line(r: &GenerationRecord) -> String {
    serde_json::to_string(r).expect("records always serialize")
}

pub fn write_records(path: &Path, records: &[GenerationRecord]) -> Result<(), HarnessError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&record_line(r));
        out.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| HarnessError::io(path, e))
}
