//! Block-style YAML restricted to JSON-compatible content.
//!
//! Anchors, aliases, tags and non-empty flow collections are rejected. Plain
//! scalars resolve to null, booleans and JSON-grammar numbers; everything else
//! is text.

use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};

use super::{AdapterError, FormatKind};
use crate::value::{Mapping, Number, ValueNode};

struct Collector {
    events: Vec<(Event, Marker)>,
}

impl MarkedEventReceiver for Collector {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        self.events.push((ev, mark));
    }
}

fn err(line: Option<usize>, message: impl Into<String>) -> AdapterError {
    AdapterError::new(FormatKind::Yaml, line, message)
}

pub fn parse_yaml(input: &str) -> Result<ValueNode, AdapterError> {
    let input = input.replace("\r\n", "\n");
    let mut collector = Collector { events: Vec::new() };
    Parser::new_from_str(&input)
        .load(&mut collector, true)
        .map_err(|e| err(Some(e.marker().line()), e.info().to_string()))?;
    let chars: Vec<char> = input.chars().collect();
    let mut builder = Builder {
        events: collector.events,
        pos: 0,
        chars,
    };
    builder.stream()
}

struct Builder {
    events: Vec<(Event, Marker)>,
    pos: usize,
    chars: Vec<char>,
}

impl Builder {
    fn next(&mut self) -> Result<(Event, Marker), AdapterError> {
        let item = self
            .events
            .get(self.pos)
            .cloned()
            .ok_or_else(|| err(None, "unexpected end of stream"))?;
        self.pos += 1;
        Ok(item)
    }

    fn stream(&mut self) -> Result<ValueNode, AdapterError> {
        let mut documents = Vec::new();
        loop {
            let (ev, mark) = self.next()?;
            match ev {
                Event::StreamStart | Event::DocumentEnd | Event::Nothing => {}
                Event::DocumentStart => {
                    if !documents.is_empty() {
                        return Err(err(Some(mark.line()), "multiple documents are not supported"));
                    }
                    documents.push(self.node()?);
                }
                Event::StreamEnd => break,
                other => return Err(err(Some(mark.line()), format!("unexpected event {other:?}"))),
            }
        }
        documents.pop().ok_or_else(|| err(None, "empty document"))
    }

    fn is_flow(&self, mark: &Marker) -> bool {
        matches!(self.chars.get(mark.index()), Some('[') | Some('{'))
    }

    fn node(&mut self) -> Result<ValueNode, AdapterError> {
        let (ev, mark) = self.next()?;
        let line = Some(mark.line());
        match ev {
            Event::Alias(_) => Err(err(line, "aliases are not supported")),
            Event::Scalar(_, _, anchor, _) | Event::SequenceStart(anchor, _) | Event::MappingStart(anchor, _)
                if anchor != 0 =>
            {
                Err(err(line, "anchors are not supported"))
            }
            Event::Scalar(_, _, _, Some(_)) | Event::SequenceStart(_, Some(_)) | Event::MappingStart(_, Some(_)) => {
                Err(err(line, "tags are not supported"))
            }
            Event::Scalar(text, style, _, None) => Ok(resolve_scalar(text, style)),
            Event::SequenceStart(..) => {
                let flow = self.is_flow(&mark);
                let mut items = Vec::new();
                while !matches!(self.events.get(self.pos), Some((Event::SequenceEnd, _))) {
                    if flow {
                        return Err(err(line, "flow sequences must be empty"));
                    }
                    items.push(self.node()?);
                }
                self.pos += 1;
                Ok(ValueNode::Sequence(items))
            }
            Event::MappingStart(..) => {
                let flow = self.is_flow(&mark);
                let mut map = Mapping::new();
                while !matches!(self.events.get(self.pos), Some((Event::MappingEnd, _))) {
                    if flow {
                        return Err(err(line, "flow mappings must be empty"));
                    }
                    let (key_ev, key_mark) = self.next()?;
                    let key = match key_ev {
                        Event::Scalar(k, _, 0, None) => k,
                        _ => return Err(err(Some(key_mark.line()), "mapping keys must be plain scalars")),
                    };
                    let value = self.node()?;
                    map.push_unique(key, value)
                        .map_err(|d| err(Some(key_mark.line()), d.to_string()))?;
                }
                self.pos += 1;
                Ok(ValueNode::Mapping(map))
            }
            other => Err(err(line, format!("unexpected event {other:?}"))),
        }
    }
}

fn resolve_scalar(text: String, style: TScalarStyle) -> ValueNode {
    if style != TScalarStyle::Plain {
        return ValueNode::Text(text);
    }
    match text.as_str() {
        "" | "~" | "null" | "Null" | "NULL" => return ValueNode::Null,
        "true" | "True" | "TRUE" => return ValueNode::Bool(true),
        "false" | "False" | "FALSE" => return ValueNode::Bool(false),
        _ => {}
    }
    let digits = match text.strip_prefix('+') {
        Some(rest) if !rest.starts_with(['+', '-']) => rest,
        _ => text.as_str(),
    };
    match digits.parse::<Number>() {
        Ok(n) => ValueNode::Number(n),
        Err(_) => ValueNode::Text(text),
    }
}

/// Block-style YAML with 2-space indentation; no trailing newline.
pub fn serialize_yaml(v: &ValueNode) -> String {
    let mut lines = Vec::new();
    match v {
        ValueNode::Mapping(m) if !m.is_empty() => write_mapping(m, 0, &mut lines),
        ValueNode::Sequence(s) if !s.is_empty() => write_sequence(s, 0, &mut lines),
        other => lines.push(inline(other)),
    }
    lines.join("\n")
}

fn pad(depth: usize) -> String {
    "  ".repeat(depth)
}

/// Scalars and empty containers, which fit on one line.
fn inline(v: &ValueNode) -> String {
    match v {
        ValueNode::Null => "null".into(),
        ValueNode::Bool(b) => b.to_string(),
        ValueNode::Number(n) => n.to_string(),
        ValueNode::Text(s) => format_text(s),
        ValueNode::Sequence(_) => "[]".into(),
        ValueNode::Mapping(_) => "{}".into(),
    }
}

fn is_block(v: &ValueNode) -> bool {
    match v {
        ValueNode::Mapping(m) => !m.is_empty(),
        ValueNode::Sequence(s) => !s.is_empty(),
        _ => false,
    }
}

fn write_mapping(m: &Mapping, depth: usize, lines: &mut Vec<String>) {
    for (k, v) in m {
        let key = format_text(k);
        if is_block(v) {
            lines.push(format!("{}{key}:", pad(depth)));
            write_block(v, depth + 1, lines);
        } else {
            lines.push(format!("{}{key}: {}", pad(depth), inline(v)));
        }
    }
}

fn write_block(v: &ValueNode, depth: usize, lines: &mut Vec<String>) {
    match v {
        ValueNode::Mapping(m) => write_mapping(m, depth, lines),
        ValueNode::Sequence(s) => write_sequence(s, depth, lines),
        _ => unreachable!("only non-empty containers are blocks"),
    }
}

fn write_sequence(items: &[ValueNode], depth: usize, lines: &mut Vec<String>) {
    for item in items {
        if is_block(item) {
            // render one level deeper, then fold the first line onto the dash
            let start = lines.len();
            write_block(item, depth + 1, lines);
            let inner = pad(depth + 1);
            let first = &lines[start];
            lines[start] = format!("{}- {}", pad(depth), &first[inner.len()..]);
        } else {
            lines.push(format!("{}- {}", pad(depth), inline(item)));
        }
    }
}

fn format_text(s: &str) -> String {
    if needs_quotes(s) {
        serde_json::to_string(s).expect("strings always serialize")
    } else {
        s.to_string()
    }
}

fn needs_quotes(s: &str) -> bool {
    let Some(first) = s.chars().next() else {
        return true;
    };
    if s.trim() != s || !matches!(resolve_scalar(s.to_string(), TScalarStyle::Plain), ValueNode::Text(_)) {
        return true;
    }
    let lower = s.to_ascii_lowercase();
    if matches!(
        lower.as_str(),
        "yes" | "no" | "on" | "off" | "y" | "n" | ".inf" | "-.inf" | "+.inf" | ".nan"
    ) {
        return true;
    }
    if "-?:,[]{}#&*!|>'\"%@`".contains(first) {
        return true;
    }
    s.contains(": ")
        || s.contains(" #")
        || s.ends_with(':')
        || s.chars()
            .any(|c| c.is_control() || c == '\u{feff}' || c == '\u{2028}' || c == '\u{2029}' || c == '\u{85}')
        || s.starts_with("0x")
        || s.starts_with("0o")
}
