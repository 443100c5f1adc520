use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use super::HarnessError;
use crate::formats::{from_json_value, FormatKind};
use crate::value::ValueNode;

/// One generation task, issued once per format.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskInstance {
    pub instance_id: String,
    pub description: String,
    pub expected: ValueNode,
    pub formats: Vec<FormatKind>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    instance_id: String,
    description: String,
    expected: serde_json::Value,
    formats: Vec<FormatKind>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("corpus line {line}: duplicate instance id `{instance_id}`")]
    DuplicateInstanceId { line: usize, instance_id: String },
}

pub fn load_corpus(path: &Path) -> Result<Vec<TaskInstance>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(parse_corpus(&text)?)
}

/// Line-delimited JSON, one instance per non-blank line.
pub fn parse_corpus(text: &str) -> Result<Vec<TaskInstance>, CorpusError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| CorpusError::Format { line: line_no, message };
        let raw: RawInstance = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if raw.instance_id.is_empty() {
            return Err(bad("empty instance_id".into()));
        }
        let expected = from_json_value(&raw.expected);
        if expected.is_null() {
            return Err(bad("expected must not be null".into()));
        }
        if raw.formats.is_empty() {
            return Err(bad("formats must not be empty".into()));
        }
        if !seen.insert(raw.instance_id.clone()) {
            return Err(CorpusError::DuplicateInstanceId {
                line: line_no,
                instance_id: raw.instance_id,
            });
        }
        out.push(TaskInstance {
            instance_id: raw.instance_id,
            description: raw.description,
            expected,
            formats: raw.formats,
        });
    }
    if out.is_empty() {
        return Err(CorpusError::Format {
            line: 0,
            message: "corpus has no instances".into(),
        });
    }
    Ok(out)
}
