//! XML ⇄ [`ValueNode`] element mapping.
//!
//! - the root element becomes a single-key mapping `{name: content}`
//! - a leaf element with no attributes becomes `Text` (XML has no numbers)
//! - child elements become mapping entries; repeated names become a sequence
//! - attributes become `@name` keys
//! - text alongside children or attributes is kept under `#text`

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{AdapterError, FormatKind, SerializeError};
use crate::value::{Mapping, ValueNode};

const TEXT_KEY: &str = "#text";

#[derive(Default)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<(String, Vec<ValueNode>)>,
    text: String,
}

impl Element {
    fn open(start: &BytesStart<'_>) -> Result<Self, String> {
        let name = String::from_utf8(start.name().as_ref().to_vec()).map_err(|e| e.to_string())?;
        let mut attrs = Vec::new();
        for attr in start.attributes() {
            let attr = attr.map_err(|e| e.to_string())?;
            let key = String::from_utf8(attr.key.as_ref().to_vec()).map_err(|e| e.to_string())?;
            let value = attr.unescape_value().map_err(|e| e.to_string())?.into_owned();
            attrs.push((key, value));
        }
        Ok(Self {
            name,
            attrs,
            ..Default::default()
        })
    }

    fn add_child(&mut self, name: String, value: ValueNode) {
        match self.children.iter_mut().find(|(n, _)| *n == name) {
            Some((_, values)) => values.push(value),
            None => self.children.push((name, vec![value])),
        }
    }

    fn finish(self) -> (String, ValueNode) {
        if self.attrs.is_empty() && self.children.is_empty() {
            return (self.name, ValueNode::Text(self.text));
        }
        let mut m = Mapping::new();
        for (k, v) in self.attrs {
            m.insert(format!("@{k}"), ValueNode::Text(v));
        }
        if !self.text.trim().is_empty() {
            m.insert(TEXT_KEY, ValueNode::Text(self.text));
        }
        for (name, mut values) in self.children {
            let v = if values.len() == 1 {
                values.pop().expect("one value")
            } else {
                ValueNode::Sequence(values)
            };
            m.insert(name, v);
        }
        (self.name, ValueNode::Mapping(m))
    }
}

fn line_of(input: &str, offset: u64) -> usize {
    let end = (offset as usize).min(input.len());
    input.as_bytes()[..end].iter().filter(|b| **b == b'\n').count() + 1
}

pub fn parse_xml(input: &str) -> Result<ValueNode, AdapterError> {
    let mut reader = Reader::from_str(input);
    let err = |reader: &Reader<&[u8]>, msg: String| {
        AdapterError::new(FormatKind::Xml, Some(line_of(input, reader.error_position())), msg)
    };
    let at = |reader: &Reader<&[u8]>, msg: &str| {
        AdapterError::new(FormatKind::Xml, Some(line_of(input, reader.buffer_position())), msg)
    };
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<(String, ValueNode)> = None;
    loop {
        let event = reader.read_event().map_err(|e| err(&reader, e.to_string()))?;
        match event {
            Event::Start(start) => {
                if root.is_some() && stack.is_empty() {
                    return Err(at(&reader, "more than one root element"));
                }
                stack.push(Element::open(&start).map_err(|m| at(&reader, &m))?);
            }
            Event::Empty(start) => {
                if root.is_some() && stack.is_empty() {
                    return Err(at(&reader, "more than one root element"));
                }
                let (name, value) = Element::open(&start).map_err(|m| at(&reader, &m))?.finish();
                match stack.last_mut() {
                    Some(parent) => parent.add_child(name, value),
                    None => root = Some((name, value)),
                }
            }
            Event::End(_) => {
                let (name, value) = stack
                    .pop()
                    .ok_or_else(|| at(&reader, "unexpected closing tag"))?
                    .finish();
                match stack.last_mut() {
                    Some(parent) => parent.add_child(name, value),
                    None => root = Some((name, value)),
                }
            }
            Event::Text(text) => {
                let text = text.unescape().map_err(|e| err(&reader, e.to_string()))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&text),
                    None if text.trim().is_empty() => {}
                    None => return Err(at(&reader, "text outside the root element")),
                }
            }
            Event::CData(data) => {
                let text =
                    String::from_utf8(data.into_inner().into_owned()).map_err(|e| at(&reader, &e.to_string()))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&text),
                    None => return Err(at(&reader, "CDATA outside the root element")),
                }
            }
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err(at(&reader, "unclosed element"));
    }
    let (name, value) = root.ok_or_else(|| at(&reader, "no root element"))?;
    let mut m = Mapping::new();
    m.insert(name, value);
    Ok(ValueNode::Mapping(m))
}

fn unrepresentable(message: impl Into<String>) -> SerializeError {
    SerializeError::unrepresentable(FormatKind::Xml, message)
}

fn check_name(name: &str) -> Result<(), SerializeError> {
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(unrepresentable(format!(
            "`{name}` is not a valid element or attribute name"
        )))
    }
}

/// Compact XML without a declaration. The root must be a one-key mapping.
pub fn serialize_xml(v: &ValueNode) -> Result<String, SerializeError> {
    let root = v
        .as_mapping()
        .filter(|m| m.len() == 1)
        .ok_or_else(|| unrepresentable("root must be a mapping with exactly one key"))?;
    let (name, content) = root.iter().next().expect("one entry");
    if matches!(content, ValueNode::Sequence(_)) {
        return Err(unrepresentable("root element cannot be a sequence"));
    }
    let mut out = String::new();
    write_element(name, content, &mut out)?;
    Ok(out)
}

fn write_element(name: &str, v: &ValueNode, out: &mut String) -> Result<(), SerializeError> {
    check_name(name)?;
    out.push('<');
    out.push_str(name);
    match v {
        ValueNode::Mapping(m) => {
            let mut text = None;
            let mut children = Vec::new();
            for (k, child) in m {
                if let Some(attr) = k.strip_prefix('@') {
                    check_name(attr)?;
                    let value = child
                        .scalar_text()
                        .ok_or_else(|| unrepresentable(format!("attribute `{attr}` must be a scalar")))?;
                    out.push_str(&format!(" {attr}=\"{}\"", escape(value.as_str())));
                } else if k == TEXT_KEY {
                    text = Some(
                        child
                            .scalar_text()
                            .ok_or_else(|| unrepresentable("`#text` must be a scalar"))?,
                    );
                } else {
                    children.push((k, child));
                }
            }
            out.push('>');
            if let Some(text) = text {
                out.push_str(&escape(text.as_str()));
            }
            for (k, child) in children {
                match child {
                    ValueNode::Sequence(items) => {
                        for item in items {
                            if matches!(item, ValueNode::Sequence(_)) {
                                return Err(unrepresentable(format!("nested sequence under `{k}`")));
                            }
                            write_element(k, item, out)?;
                        }
                    }
                    other => write_element(k, other, out)?,
                }
            }
        }
        ValueNode::Sequence(_) => return Err(unrepresentable("sequence outside a mapping")),
        scalar => {
            out.push('>');
            let text = scalar.scalar_text().expect("scalar");
            out.push_str(&escape(text.as_str()));
        }
    }
    out.push_str("</");
    out.push_str(name);
    out.push('>');
    Ok(())
}
