//! JSON, XML, YAML and TOON adapters over [`ValueNode`].
//!
//! JSON, XML and YAML lexing is delegated to `serde_json`, `quick-xml` and
//! `yaml-rust2`; the mapping onto [`ValueNode`] and all serializers live here.
//! TOON goes through [`crate::toon`].

mod json;
mod xml;
mod yaml;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::toon::{self, ToonDialect, ToonError};
use crate::value::ValueNode;

pub use json::{from_json_value, parse_json, serialize_json, serialize_json_pretty, to_json_value};
pub use xml::{parse_xml, serialize_xml};
pub use yaml::{parse_yaml, serialize_yaml};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    Json,
    Xml,
    Yaml,
    Toon,
}

impl FormatKind {
    pub const ALL: [FormatKind; 4] = [FormatKind::Json, FormatKind::Xml, FormatKind::Yaml, FormatKind::Toon];

    pub fn as_str(self) -> &'static str {
        match self {
            FormatKind::Json => "json",
            FormatKind::Xml => "xml",
            FormatKind::Yaml => "yaml",
            FormatKind::Toon => "toon",
        }
    }

    /// Display name used in prompts.
    pub fn label(self) -> &'static str {
        match self {
            FormatKind::Json => "JSON",
            FormatKind::Xml => "XML",
            FormatKind::Yaml => "YAML",
            FormatKind::Toon => "TOON",
        }
    }
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown format `{0}` (expected json, xml, yaml or toon)")]
pub struct UnknownFormat(pub String);

impl FromStr for FormatKind {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(FormatKind::Json),
            "xml" => Ok(FormatKind::Xml),
            "yaml" | "yml" => Ok(FormatKind::Yaml),
            "toon" => Ok(FormatKind::Toon),
            _ => Err(UnknownFormat(s.to_string())),
        }
    }
}

/// Parse failure in any of the four formats.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct AdapterError {
    pub format: FormatKind,
    pub line: Option<usize>,
    pub message: String,
}

impl AdapterError {
    pub(crate) fn new(format: FormatKind, line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            format,
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for AdapterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(
                f,
                "{} parse error at line {}: {}",
                self.format.label(),
                line,
                self.message
            ),
            None => write!(f, "{} parse error: {}", self.format.label(), self.message),
        }
    }
}

impl From<ToonError> for AdapterError {
    fn from(e: ToonError) -> Self {
        AdapterError::new(FormatKind::Toon, Some(e.line), format!("{}: {}", e.kind, e.message))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SerializeError {
    #[error("value cannot be represented as {format}: {message}", format = .format.label())]
    UnrepresentableValue { format: FormatKind, message: String },
}

impl SerializeError {
    pub(crate) fn unrepresentable(format: FormatKind, message: impl Into<String>) -> Self {
        SerializeError::UnrepresentableValue {
            format,
            message: message.into(),
        }
    }
}

pub fn parse_format(input: &str, format: FormatKind) -> Result<ValueNode, AdapterError> {
    match format {
        FormatKind::Json => parse_json(input),
        FormatKind::Xml => parse_xml(input),
        FormatKind::Yaml => parse_yaml(input),
        FormatKind::Toon => Ok(toon::parse_toon(input, &ToonDialect::default())?),
    }
}

pub fn serialize_format(v: &ValueNode, format: FormatKind) -> Result<String, SerializeError> {
    match format {
        FormatKind::Json => Ok(serialize_json(v)),
        FormatKind::Xml => serialize_xml(v),
        FormatKind::Yaml => Ok(serialize_yaml(v)),
        FormatKind::Toon => toon::serialize_toon(v, &ToonDialect::default()).map_err(|e| {
            let toon::ToonSerializeError::UnrepresentableValue(message) = e;
            SerializeError::unrepresentable(FormatKind::Toon, message)
        }),
    }
}
