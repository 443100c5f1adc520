//! Format-agnostic structured values.
//!
//! Every codec in this crate parses into and serializes from [`ValueNode`].
//! Mappings keep insertion order so serializers are deterministic, while
//! [`normalized_equal`] ignores that order.

mod number;
mod path;
#[cfg(test)]
pub(crate) mod testgen;

pub use number::{Number, NumberParseError};
pub use path::{flatten, ContainerKind, FlatEntry, FlatValue, KeyPath, KeyPathParseError, PathSegment};

/// Canonical in-memory structured value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueNode {
    Null,
    Bool(bool),
    Number(Number),
    Text(String),
    Sequence(Vec<ValueNode>),
    Mapping(Mapping),
}

impl ValueNode {
    pub fn is_scalar(&self) -> bool {
        !matches!(self, ValueNode::Sequence(_) | ValueNode::Mapping(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, ValueNode::Null)
    }

    pub fn as_mapping(&self) -> Option<&Mapping> {
        match self {
            ValueNode::Mapping(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_sequence(&self) -> Option<&[ValueNode]> {
        match self {
            ValueNode::Sequence(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            ValueNode::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        ValueNode::Text(s.into())
    }

    pub fn int(v: i64) -> Self {
        ValueNode::Number(Number::from_i64(v))
    }

    /// Builds a mapping; later duplicates replace earlier values in place.
    pub fn mapping<K, I>(entries: I) -> Self
    where
        K: Into<String>,
        I: IntoIterator<Item = (K, ValueNode)>,
    {
        let mut m = Mapping::new();
        for (k, v) in entries {
            m.insert(k, v);
        }
        ValueNode::Mapping(m)
    }

    /// Scalar rendered as plain text, the way a text-only format would carry it.
    pub fn scalar_text(&self) -> Option<String> {
        match self {
            ValueNode::Null => Some(String::new()),
            ValueNode::Bool(b) => Some(b.to_string()),
            ValueNode::Number(n) => Some(n.to_string()),
            ValueNode::Text(s) => Some(s.clone()),
            _ => None,
        }
    }
}

/// Insertion-ordered mapping with unique keys.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mapping {
    entries: Vec<(String, ValueNode)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("duplicate key `{0}`")]
pub struct DuplicateKey(pub String);

impl Mapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&ValueNode> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    /// Inserts or replaces; a replaced key keeps its original position.
    pub fn insert(&mut self, key: impl Into<String>, value: ValueNode) -> Option<ValueNode> {
        let key = key.into();
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| *k == key) {
            return Some(std::mem::replace(&mut slot.1, value));
        }
        self.entries.push((key, value));
        None
    }

    /// Appends a new key, failing if it is already present.
    pub fn push_unique(&mut self, key: impl Into<String>, value: ValueNode) -> Result<(), DuplicateKey> {
        let key = key.into();
        if self.contains_key(&key) {
            return Err(DuplicateKey(key));
        }
        self.entries.push((key, value));
        Ok(())
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&str, &ValueNode)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn keys(&self) -> impl ExactSizeIterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = &ValueNode> {
        self.entries.iter().map(|(_, v)| v)
    }

    pub fn into_entries(self) -> Vec<(String, ValueNode)> {
        self.entries
    }
}

impl<'a> IntoIterator for &'a Mapping {
    type Item = (&'a str, &'a ValueNode);
    type IntoIter = std::iter::Map<
        std::slice::Iter<'a, (String, ValueNode)>,
        fn(&'a (String, ValueNode)) -> (&'a str, &'a ValueNode),
    >;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Structural equality ignoring mapping order; numbers compare by exact value.
pub fn normalized_equal(a: &ValueNode, b: &ValueNode) -> bool {
    match (a, b) {
        (ValueNode::Null, ValueNode::Null) => true,
        (ValueNode::Bool(x), ValueNode::Bool(y)) => x == y,
        (ValueNode::Number(x), ValueNode::Number(y)) => x.value_eq(y),
        (ValueNode::Text(x), ValueNode::Text(y)) => x == y,
        (ValueNode::Sequence(xs), ValueNode::Sequence(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| normalized_equal(x, y))
        }
        (ValueNode::Mapping(xm), ValueNode::Mapping(ym)) => {
            xm.len() == ym.len()
                && xm
                    .iter()
                    .all(|(k, x)| ym.get(k).is_some_and(|y| normalized_equal(x, y)))
        }
        _ => false,
    }
}
