use crate::value::{Mapping, Number, ValueNode};

use super::{ToonDialect, ToonSerializeError};

/// Deterministic TOON rendering; no trailing newline.
///
/// Uniform sequences of all-scalar mappings use the tabular form, sequences of
/// scalars are written inline, anything else falls back to `- ` list items.
pub fn serialize_toon(v: &ValueNode, dialect: &ToonDialect) -> Result<String, ToonSerializeError> {
    let mut w = Writer {
        lines: Vec::new(),
        dialect: *dialect,
    };
    match v {
        ValueNode::Mapping(m) => w.mapping(m, 0)?,
        ValueNode::Sequence(items) => w.array(String::new(), None, items, 1)?,
        _ => {
            return Err(ToonSerializeError::UnrepresentableValue(
                "a scalar cannot be a document root".into(),
            ))
        }
    }
    Ok(w.lines.join("\n"))
}

struct Writer {
    lines: Vec<String>,
    dialect: ToonDialect,
}

impl Writer {
    fn indent(&self, depth: usize) -> String {
        " ".repeat(depth * self.dialect.indent_width())
    }

    fn mapping(&mut self, m: &Mapping, depth: usize) -> Result<(), ToonSerializeError> {
        for (k, v) in m {
            self.field(self.indent(depth), k, v, depth + 1)?;
        }
        Ok(())
    }

    fn field(
        &mut self,
        prefix: String,
        key: &str,
        v: &ValueNode,
        child_depth: usize,
    ) -> Result<(), ToonSerializeError> {
        let key = format_key(key, self.dialect.delimiter())?;
        match v {
            ValueNode::Mapping(m) => {
                self.lines.push(format!("{prefix}{key}:"));
                self.mapping(m, child_depth)
            }
            ValueNode::Sequence(items) => self.array(prefix, Some(&key), items, child_depth),
            scalar => {
                let text = format_scalar(scalar, self.dialect.delimiter());
                self.lines.push(format!("{prefix}{key}: {text}"));
                Ok(())
            }
        }
    }

    fn array(
        &mut self,
        prefix: String,
        key: Option<&str>,
        items: &[ValueNode],
        child_depth: usize,
    ) -> Result<(), ToonSerializeError> {
        let key = key.unwrap_or("");
        let n = items.len();
        let delim = self.dialect.delimiter();
        if items.iter().all(ValueNode::is_scalar) {
            if n == 0 {
                self.lines.push(format!("{prefix}{key}[0]:"));
            } else {
                let joined = join(items.iter().map(|v| format_scalar(v, delim)), delim);
                self.lines.push(format!("{prefix}{key}[{n}]: {joined}"));
            }
            return Ok(());
        }
        if let Some(fields) = tabular_fields(items) {
            let header = fields
                .iter()
                .map(|f| format_key(f, delim))
                .collect::<Result<Vec<_>, _>>()?;
            self.lines
                .push(format!("{prefix}{key}[{n}]{{{}}}:", join(header.into_iter(), delim)));
            let indent = self.indent(child_depth);
            for item in items {
                let row = item.as_mapping().expect("tabular rows are mappings");
                let cells = fields
                    .iter()
                    .map(|f| format_scalar(row.get(f).expect("uniform keys"), delim));
                self.lines.push(format!("{indent}{}", join(cells, delim)));
            }
            return Ok(());
        }
        self.lines.push(format!("{prefix}{key}[{n}]:"));
        for item in items {
            self.list_item(item, child_depth)?;
        }
        Ok(())
    }

    fn list_item(&mut self, item: &ValueNode, depth: usize) -> Result<(), ToonSerializeError> {
        let hyphen = format!("{}- ", self.indent(depth));
        match item {
            ValueNode::Mapping(m) if m.is_empty() => {
                self.lines.push(format!("{}-", self.indent(depth)));
            }
            ValueNode::Mapping(m) => {
                let mut entries = m.iter();
                let (k0, v0) = entries.next().expect("non-empty");
                self.field(hyphen, k0, v0, depth + 2)?;
                for (k, v) in entries {
                    self.field(self.indent(depth + 1), k, v, depth + 2)?;
                }
            }
            ValueNode::Sequence(inner) => self.array(hyphen, None, inner, depth + 1)?,
            scalar => {
                let text = format_scalar(scalar, self.dialect.delimiter());
                self.lines.push(format!("{hyphen}{text}"));
            }
        }
        Ok(())
    }
}

fn join(parts: impl Iterator<Item = String>, delim: char) -> String {
    let mut out = String::new();
    for (i, p) in parts.enumerate() {
        if i > 0 {
            out.push(delim);
        }
        out.push_str(&p);
    }
    out
}

/// Field names of a uniform, all-scalar sequence of mappings.
fn tabular_fields(items: &[ValueNode]) -> Option<Vec<String>> {
    let first = items.first()?.as_mapping()?;
    if first.is_empty() {
        return None;
    }
    let fields: Vec<String> = first.keys().map(str::to_string).collect();
    for item in items {
        let m = item.as_mapping()?;
        if m.len() != fields.len() || !m.values().all(ValueNode::is_scalar) {
            return None;
        }
        if !fields.iter().all(|f| m.contains_key(f)) {
            return None;
        }
    }
    Some(fields)
}

fn format_key(key: &str, delim: char) -> Result<String, ToonSerializeError> {
    if key.is_empty() {
        return Err(ToonSerializeError::UnrepresentableValue("empty mapping key".into()));
    }
    let bare = key
        .bytes()
        .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
        && !key.contains(delim);
    Ok(if bare { key.to_string() } else { quote(key) })
}

fn format_scalar(v: &ValueNode, delim: char) -> String {
    match v {
        ValueNode::Null => "null".into(),
        ValueNode::Bool(b) => b.to_string(),
        ValueNode::Number(n) => n.to_string(),
        ValueNode::Text(s) if needs_quotes(s, delim) => quote(s),
        ValueNode::Text(s) => s.clone(),
        ValueNode::Sequence(_) | ValueNode::Mapping(_) => unreachable!("containers are not scalars"),
    }
}

fn needs_quotes(s: &str, delim: char) -> bool {
    s.is_empty()
        || s.trim() != s
        || matches!(s, "true" | "false" | "null")
        || s.parse::<Number>().is_ok()
        || is_leading_zero_integer(s)
        || s.starts_with('-')
        || s.contains(delim)
        || s.chars()
            .any(|c| matches!(c, ':' | '"' | '\\' | '[' | ']' | '{' | '}') || c.is_control())
}

fn is_leading_zero_integer(s: &str) -> bool {
    s.len() > 1 && s.starts_with('0') && s.bytes().all(|b| b.is_ascii_digit())
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
