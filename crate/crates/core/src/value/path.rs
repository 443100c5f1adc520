use std::fmt;
use std::str::FromStr;

use super::ValueNode;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathSegment {
    Key(String),
    Index(usize),
}

/// Location of a leaf inside a [`ValueNode`].
///
/// Text form uses dotted keys and bracketed indices (`users[0].name`). Keys
/// outside `[A-Za-z0-9_-]+` are written as `["quoted key"]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct KeyPath {
    segments: Vec<PathSegment>,
}

impl KeyPath {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn is_root(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn child_key(&self, key: &str) -> Self {
        let mut segments = self.segments.clone();
        segments.push(PathSegment::Key(key.to_string()));
        Self { segments }
    }

    pub fn child_index(&self, index: usize) -> Self {
        let mut segments = self.segments.clone();
        segments.push(PathSegment::Index(index));
        Self { segments }
    }
}

impl From<Vec<PathSegment>> for KeyPath {
    fn from(segments: Vec<PathSegment>) -> Self {
        Self { segments }
    }
}

fn is_bare_key(k: &str) -> bool {
    !k.is_empty() && k.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

impl fmt::Display for KeyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            match seg {
                PathSegment::Key(k) if is_bare_key(k) => {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    f.write_str(k)?;
                }
                PathSegment::Key(k) => {
                    let quoted = serde_json::to_string(k).map_err(|_| fmt::Error)?;
                    write!(f, "[{quoted}]")?;
                }
                PathSegment::Index(n) => write!(f, "[{n}]")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid key path `{path}` at byte {offset}")]
pub struct KeyPathParseError {
    pub path: String,
    pub offset: usize,
}

impl FromStr for KeyPath {
    type Err = KeyPathParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |offset| KeyPathParseError {
            path: s.to_string(),
            offset,
        };
        let bytes = s.as_bytes();
        let mut segments = Vec::new();
        let mut i = 0;
        let bare_len = |from: usize| {
            bytes[from..]
                .iter()
                .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_' || **b == b'-')
                .count()
        };
        while i < bytes.len() {
            match bytes[i] {
                b'.' if !segments.is_empty() => {
                    let n = bare_len(i + 1);
                    if n == 0 {
                        return Err(err(i + 1));
                    }
                    segments.push(PathSegment::Key(s[i + 1..i + 1 + n].to_string()));
                    i += 1 + n;
                }
                b'[' if bytes.get(i + 1) == Some(&b'"') => {
                    let start = i + 1;
                    let mut j = start + 1;
                    while j < bytes.len() && bytes[j] != b'"' {
                        j += if bytes[j] == b'\\' { 2 } else { 1 };
                    }
                    if j >= bytes.len() || bytes.get(j + 1) != Some(&b']') {
                        return Err(err(i));
                    }
                    let key: String = serde_json::from_str(&s[start..=j]).map_err(|_| err(start))?;
                    segments.push(PathSegment::Key(key));
                    i = j + 2;
                }
                b'[' => {
                    let digits = bytes[i + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
                    if digits == 0 || bytes.get(i + 1 + digits) != Some(&b']') {
                        return Err(err(i));
                    }
                    let n = s[i + 1..i + 1 + digits].parse().map_err(|_| err(i + 1))?;
                    segments.push(PathSegment::Index(n));
                    i += digits + 2;
                }
                _ if segments.is_empty() => {
                    let n = bare_len(i);
                    if n == 0 {
                        return Err(err(i));
                    }
                    segments.push(PathSegment::Key(s[i..i + n].to_string()));
                    i += n;
                }
                _ => return Err(err(i)),
            }
        }
        Ok(KeyPath { segments })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContainerKind {
    Mapping,
    Sequence,
}

/// A flattened leaf: a scalar, or the marker for an empty container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlatValue {
    Scalar(ValueNode),
    EmptyContainer(ContainerKind),
}

pub type FlatEntry = (KeyPath, FlatValue);

/// Every leaf scalar with its full path, in document order.
///
/// Empty mappings and sequences contribute a single
/// [`FlatValue::EmptyContainer`] entry so structure-only content is still
/// countable.
pub fn flatten(v: &ValueNode) -> Vec<FlatEntry> {
    let mut out = Vec::new();
    flatten_into(v, KeyPath::root(), &mut out);
    out
}

fn flatten_into(v: &ValueNode, path: KeyPath, out: &mut Vec<FlatEntry>) {
    match v {
        ValueNode::Mapping(m) if m.is_empty() => out.push((path, FlatValue::EmptyContainer(ContainerKind::Mapping))),
        ValueNode::Sequence(s) if s.is_empty() => out.push((path, FlatValue::EmptyContainer(ContainerKind::Sequence))),
        ValueNode::Mapping(m) => {
            for (k, child) in m {
                flatten_into(child, path.child_key(k), out);
            }
        }
        ValueNode::Sequence(s) => {
            for (i, child) in s.iter().enumerate() {
                flatten_into(child, path.child_index(i), out);
            }
        }
        scalar => out.push((path, FlatValue::Scalar(scalar.clone()))),
    }
}
