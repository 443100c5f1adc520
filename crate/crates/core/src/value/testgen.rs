//! Proptest strategies for random values, used by unit tests across modules.

use proptest::prelude::*;

use super::{Mapping, Number, ValueNode};

pub fn bare_key() -> impl Strategy<Value = String> {
    "[a-z_][a-z0-9_]{0,7}"
}

pub fn number() -> impl Strategy<Value = Number> {
    prop_oneof![
        any::<i64>().prop_map(Number::from_i64),
        (-1_000_000i64..1_000_000, 1u32..6).prop_map(|(m, s)| {
            let text = format!("{}e-{}", m, s);
            let f: f64 = text.parse().unwrap();
            Number::from_f64(f).unwrap()
        }),
        "-?(0|[1-9][0-9]{0,20})\\.[0-9]{1,6}".prop_map(|s| s.parse().unwrap()),
    ]
}

pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z][a-zA-Z0-9 ]{0,10}",
        any::<String>(),
        Just(String::new()),
        Just("true".to_string()),
        Just("42".to_string()),
        Just("a,b: c".to_string()),
        Just("- dash".to_string()),
    ]
}

pub fn scalar() -> impl Strategy<Value = ValueNode> {
    prop_oneof![
        Just(ValueNode::Null),
        any::<bool>().prop_map(ValueNode::Bool),
        number().prop_map(ValueNode::Number),
        text().prop_map(ValueNode::Text),
    ]
}

fn mapping_of(
    keys: impl Strategy<Value = String> + 'static,
    values: impl Strategy<Value = ValueNode> + 'static,
    max: usize,
) -> impl Strategy<Value = ValueNode> {
    prop::collection::vec((keys, values), 0..max).prop_map(|entries| {
        let mut m = Mapping::new();
        for (k, v) in entries {
            m.insert(k, v);
        }
        ValueNode::Mapping(m)
    })
}

/// Arbitrary values of bounded depth with bare keys.
pub fn value() -> impl Strategy<Value = ValueNode> {
    scalar().prop_recursive(4, 48, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..6).prop_map(ValueNode::Sequence),
            mapping_of(bare_key(), inner, 6),
        ]
    })
}

/// Mapping-rooted values, the shape every document format can carry.
pub fn document() -> impl Strategy<Value = ValueNode> {
    mapping_of(bare_key(), value(), 6)
}
