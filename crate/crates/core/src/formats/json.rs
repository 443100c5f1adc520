use serde_json::Value;

use super::{AdapterError, FormatKind};
use crate::value::{Mapping, Number, ValueNode};

/// RFC 8259 JSON. Duplicate object keys keep the last value.
pub fn parse_json(input: &str) -> Result<ValueNode, AdapterError> {
    let value: Value =
        serde_json::from_str(input).map_err(|e| AdapterError::new(FormatKind::Json, Some(e.line()), e.to_string()))?;
    Ok(from_json_value(&value))
}

pub fn from_json_value(value: &Value) -> ValueNode {
    match value {
        Value::Null => ValueNode::Null,
        Value::Bool(b) => ValueNode::Bool(*b),
        // arbitrary_precision keeps the literal text, so this parse is lossless
        Value::Number(n) => ValueNode::Number(
            n.to_string()
                .parse::<Number>()
                .expect("serde_json numbers follow the JSON grammar"),
        ),
        Value::String(s) => ValueNode::Text(s.clone()),
        Value::Array(items) => ValueNode::Sequence(items.iter().map(from_json_value).collect()),
        Value::Object(obj) => {
            let mut m = Mapping::new();
            for (k, v) in obj {
                m.insert(k.clone(), from_json_value(v));
            }
            ValueNode::Mapping(m)
        }
    }
}

pub fn to_json_value(v: &ValueNode) -> Value {
    match v {
        ValueNode::Null => Value::Null,
        ValueNode::Bool(b) => Value::Bool(*b),
        ValueNode::Number(n) => Value::Number(
            n.to_string()
                .parse::<serde_json::Number>()
                .expect("rendered numbers follow the JSON grammar"),
        ),
        ValueNode::Text(s) => Value::String(s.clone()),
        ValueNode::Sequence(items) => Value::Array(items.iter().map(to_json_value).collect()),
        ValueNode::Mapping(m) => Value::Object(m.iter().map(|(k, v)| (k.to_string(), to_json_value(v))).collect()),
    }
}

/// Compact JSON, keys in mapping order.
pub fn serialize_json(v: &ValueNode) -> String {
    serde_json::to_string(&to_json_value(v)).expect("JSON values always serialize")
}

pub fn serialize_json_pretty(v: &ValueNode) -> String {
    serde_json::to_string_pretty(&to_json_value(v)).expect("JSON values always serialize")
}
