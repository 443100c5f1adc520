//! TOON (Token-Oriented Object Notation) codec.
//!
//! Supported grammar:
//!
//! ```text
//! key: value                 scalar field
//! key:                       nested mapping, children one level deeper
//! key[N]: v1,v2              inline primitive array
//! key[N]{f1,f2}:             tabular array, N rows one level deeper
//! key[N]:                    list array, N `- item` lines one level deeper
//! ```
//!
//! A document whose first line is a keyless header (`[N]: ...`) has a
//! sequence root; otherwise the root is a mapping. The empty document is the
//! empty mapping. Bare keys match `[A-Za-z0-9_.-]+`, anything else is
//! double-quoted with `\\ \" \n \r \t` escapes.
//!
//! Parsing is strict by default: declared lengths, tabular field counts and
//! sibling key uniqueness are all enforced.

mod parse;
mod serialize;

use std::fmt;

use crate::value::ValueNode;

pub use parse::{parse_toon, parse_toon_with, ParseMode};
pub use serialize::serialize_toon;

/// Indentation and delimiter settings shared by parser and serializer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToonDialect {
    indent_width: usize,
    delimiter: char,
}

impl Default for ToonDialect {
    fn default() -> Self {
        Self {
            indent_width: 2,
            delimiter: ',',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DialectError {
    #[error("indent width must be at least 1")]
    ZeroIndent,
    #[error("delimiter {0:?} is not allowed")]
    BadDelimiter(char),
}

impl ToonDialect {
    pub fn new(indent_width: usize, delimiter: char) -> Result<Self, DialectError> {
        if indent_width == 0 {
            return Err(DialectError::ZeroIndent);
        }
        if matches!(delimiter, '\n' | '\r' | ' ' | '"' | '\\' | ':' | '[' | ']' | '{' | '}') {
            return Err(DialectError::BadDelimiter(delimiter));
        }
        Ok(Self {
            indent_width,
            delimiter,
        })
    }

    pub fn indent_width(&self) -> usize {
        self.indent_width
    }

    pub fn delimiter(&self) -> char {
        self.delimiter
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToonErrorKind {
    IndentationError,
    LengthMismatch,
    FieldCountMismatch,
    UnterminatedQuote,
    InvalidEscape,
    DuplicateKey,
    /// Any line whose structure does not match the grammar.
    MalformedHeader,
}

impl fmt::Display for ToonErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ToonErrorKind::IndentationError => "indentation error",
            ToonErrorKind::LengthMismatch => "length mismatch",
            ToonErrorKind::FieldCountMismatch => "field count mismatch",
            ToonErrorKind::UnterminatedQuote => "unterminated quote",
            ToonErrorKind::InvalidEscape => "invalid escape",
            ToonErrorKind::DuplicateKey => "duplicate key",
            ToonErrorKind::MalformedHeader => "malformed line",
        };
        f.write_str(s)
    }
}

/// Parse failure with the 1-based line it was detected on.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}: {message}")]
pub struct ToonError {
    pub kind: ToonErrorKind,
    pub line: usize,
    pub message: String,
}

impl ToonError {
    pub(crate) fn new(kind: ToonErrorKind, line: usize, message: impl Into<String>) -> Self {
        Self {
            kind,
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToonSerializeError {
    #[error("value cannot be represented in TOON: {0}")]
    UnrepresentableValue(String),
}

/// Outcome of [`validate_toon`]; never an `Err`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToonValidation {
    pub valid: bool,
    pub error: Option<ToonError>,
}

pub fn validate_toon(input: &str, dialect: &ToonDialect) -> ToonValidation {
    match parse_toon(input, dialect) {
        Ok(_) => ToonValidation {
            valid: true,
            error: None,
        },
        Err(e) => ToonValidation {
            valid: false,
            error: Some(e),
        },
    }
}

/// A parsed TOON document together with the dialect it was read with.
#[derive(Debug, Clone, PartialEq)]
pub struct ToonDocument {
    pub root: ValueNode,
    pub dialect: ToonDialect,
}

impl ToonDocument {
    pub fn parse(input: &str, dialect: ToonDialect) -> Result<Self, ToonError> {
        Ok(Self {
            root: parse_toon(input, &dialect)?,
            dialect,
        })
    }

    pub fn render(&self) -> Result<String, ToonSerializeError> {
        serialize_toon(&self.root, &self.dialect)
    }
}

#[cfg(test)]
mod tests;
