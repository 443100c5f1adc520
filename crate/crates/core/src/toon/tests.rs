use proptest::prelude::*;

use super::*;
use crate::value::{normalized_equal, testgen, Mapping, ValueNode};

fn d() -> ToonDialect {
    ToonDialect::default()
}

fn users() -> ValueNode {
    ValueNode::mapping([(
        "users",
        ValueNode::Sequence(vec![
            ValueNode::mapping([("id", ValueNode::int(1)), ("name", ValueNode::text("Alice"))]),
            ValueNode::mapping([("id", ValueNode::int(2)), ("name", ValueNode::text("Bob"))]),
        ]),
    )])
}

const USERS_TOON: &str = "users[2]{id,name}:\n  1,Alice\n  2,Bob";

fn kind_of(input: &str) -> ToonErrorKind {
    parse_toon(input, &d()).unwrap_err().kind
}

#[test]
fn parses_tabular_array() {
    let v = parse_toon(USERS_TOON, &d()).unwrap();
    assert_eq!(v, users());
}

#[test]
fn parses_scalar_field() {
    let v = parse_toon("count: 3", &d()).unwrap();
    assert_eq!(v, ValueNode::mapping([("count", ValueNode::int(3))]));
}

#[test]
fn declared_length_is_enforced() {
    let err = parse_toon("xs[3]: 1,2", &d()).unwrap_err();
    assert_eq!(err.kind, ToonErrorKind::LengthMismatch);
    assert_eq!(err.line, 1);
}

#[test]
fn serializes_tabular_array() {
    assert_eq!(serialize_toon(&users(), &d()).unwrap(), USERS_TOON);
}

#[test]
fn empty_mapping_is_empty_document() {
    let empty = ValueNode::Mapping(Mapping::new());
    assert_eq!(serialize_toon(&empty, &d()).unwrap(), "");
    assert_eq!(parse_toon("", &d()).unwrap(), empty);
    assert_eq!(parse_toon("\n\n", &d()).unwrap(), empty);
}

#[test]
fn delimiter_in_value_is_quoted() {
    let v = ValueNode::mapping([("note", ValueNode::text("a,b"))]);
    let s = serialize_toon(&v, &d()).unwrap();
    assert_eq!(s, "note: \"a,b\"");
    assert_eq!(parse_toon(&s, &d()).unwrap(), v);
}

#[test]
fn validate_reports_without_failing() {
    assert_eq!(
        validate_toon(USERS_TOON, &d()),
        ToonValidation {
            valid: true,
            error: None
        }
    );
    let bad = validate_toon("xs[3]: 1,2", &d());
    assert!(!bad.valid);
    assert_eq!(bad.error.unwrap().kind, ToonErrorKind::LengthMismatch);
    let indent = validate_toon("a:\n   b: 1", &d());
    assert!(!indent.valid);
    let err = indent.error.unwrap();
    assert_eq!(err.kind, ToonErrorKind::IndentationError);
    assert_eq!(err.line, 2);
}

#[test]
fn error_kinds() {
    assert_eq!(kind_of("t[2]{a,b}:\n  1,2\n  3"), ToonErrorKind::FieldCountMismatch);
    assert_eq!(kind_of("t[1]{a,b}:\n  1,2\n  3,4"), ToonErrorKind::LengthMismatch);
    assert_eq!(kind_of("a: \"open"), ToonErrorKind::UnterminatedQuote);
    assert_eq!(kind_of("xs[2]: \"a,b"), ToonErrorKind::UnterminatedQuote);
    assert_eq!(kind_of("a: \"x\\q\""), ToonErrorKind::InvalidEscape);
    assert_eq!(kind_of("a: 1\na: 2"), ToonErrorKind::DuplicateKey);
    assert_eq!(kind_of("t[1]{a,a}:\n  1,2"), ToonErrorKind::DuplicateKey);
    assert_eq!(kind_of("a:\n\tb: 1"), ToonErrorKind::IndentationError);
    assert_eq!(kind_of("  a: 1"), ToonErrorKind::IndentationError);
    assert_eq!(kind_of("a: 1\n    b: 2"), ToonErrorKind::IndentationError);
    assert_eq!(kind_of("just words"), ToonErrorKind::MalformedHeader);
    assert_eq!(kind_of("xs[two]: 1"), ToonErrorKind::MalformedHeader);
    assert_eq!(kind_of("xs[2]:\n  1\n  2"), ToonErrorKind::MalformedHeader);
    assert_eq!(kind_of("a: \"x\" y"), ToonErrorKind::MalformedHeader);
}

#[test]
fn windows_line_endings_are_accepted() {
    let v = parse_toon(&USERS_TOON.replace('\n', "\r\n"), &d()).unwrap();
    assert_eq!(v, users());
}

#[test]
fn lenient_mode_tolerates_lengths_and_duplicates() {
    let v = parse_toon_with("xs[3]: 1,2\nk: 1\nk: 2", &d(), ParseMode::Lenient).unwrap();
    assert_eq!(
        v,
        ValueNode::mapping([
            ("xs", ValueNode::Sequence(vec![ValueNode::int(1), ValueNode::int(2)])),
            ("k", ValueNode::int(2)),
        ])
    );
}

#[test]
fn nested_and_list_forms() {
    let doc = "\
order:
  id: 7
  tags[2]: a,b
  items[3]:
    - sku: X1
      qty: 2
      dims:
        w: 1.5
    - [2]: 1,2
    - plain
  empty[0]:
  meta:
root[1]:
  -";
    let v = parse_toon(doc, &d()).unwrap();
    let order = v.as_mapping().unwrap().get("order").unwrap().as_mapping().unwrap();
    assert_eq!(order.get("id"), Some(&ValueNode::int(7)));
    let items = order.get("items").unwrap().as_sequence().unwrap();
    assert_eq!(items.len(), 3);
    let first = items[0].as_mapping().unwrap();
    assert_eq!(first.get("sku"), Some(&ValueNode::text("X1")));
    assert_eq!(
        first.get("dims").unwrap().as_mapping().unwrap().get("w"),
        Some(&ValueNode::Number("1.5".parse().unwrap()))
    );
    assert_eq!(
        items[1],
        ValueNode::Sequence(vec![ValueNode::int(1), ValueNode::int(2)])
    );
    assert_eq!(items[2], ValueNode::text("plain"));
    assert_eq!(order.get("empty"), Some(&ValueNode::Sequence(vec![])));
    assert_eq!(order.get("meta"), Some(&ValueNode::Mapping(Mapping::new())));
    // and it serializes back to the same text
    assert_eq!(serialize_toon(&v, &d()).unwrap(), doc);
}

#[test]
fn root_sequence_documents() {
    let v = parse_toon("[3]: 1,x,true", &d()).unwrap();
    assert_eq!(
        v,
        ValueNode::Sequence(vec![ValueNode::int(1), ValueNode::text("x"), ValueNode::Bool(true)])
    );
    let rows = parse_toon("[2]{a}:\n  1\n  2", &d()).unwrap();
    assert_eq!(rows.as_sequence().unwrap().len(), 2);
    assert_eq!(kind_of("[1]: 1\nk: 2"), ToonErrorKind::MalformedHeader);
}

#[test]
fn literal_lookalikes_are_quoted() {
    let v = ValueNode::mapping([
        ("a", ValueNode::text("true")),
        ("b", ValueNode::text("12")),
        ("c", ValueNode::text("")),
        ("d", ValueNode::text(" pad")),
        ("e", ValueNode::text("007")),
        ("f", ValueNode::text("-x")),
        ("g", ValueNode::text("line\nbreak")),
        ("h", ValueNode::Null),
    ]);
    let s = serialize_toon(&v, &d()).unwrap();
    assert_eq!(
        s,
        "a: \"true\"\nb: \"12\"\nc: \"\"\nd: \" pad\"\ne: \"007\"\nf: \"-x\"\ng: \"line\\nbreak\"\nh: null"
    );
    assert_eq!(parse_toon(&s, &d()).unwrap(), v);
}

#[test]
fn odd_keys_are_quoted() {
    let v = ValueNode::mapping([("first name", ValueNode::int(1)), ("a:b", ValueNode::int(2))]);
    let s = serialize_toon(&v, &d()).unwrap();
    assert_eq!(s, "\"first name\": 1\n\"a:b\": 2");
    assert_eq!(parse_toon(&s, &d()).unwrap(), v);
}

#[test]
fn empty_key_and_scalar_root_are_unrepresentable() {
    let v = ValueNode::mapping([("", ValueNode::int(1))]);
    assert!(matches!(
        serialize_toon(&v, &d()),
        Err(ToonSerializeError::UnrepresentableValue(_))
    ));
    assert!(serialize_toon(&ValueNode::int(1), &d()).is_err());
}

#[test]
fn alternate_dialect() {
    let dialect = ToonDialect::new(4, '|').unwrap();
    let s = serialize_toon(&users(), &dialect).unwrap();
    assert_eq!(s, "users[2]{id|name}:\n    1|Alice\n    2|Bob");
    assert_eq!(parse_toon(&s, &dialect).unwrap(), users());
    assert!(ToonDialect::new(0, ',').is_err());
    assert!(ToonDialect::new(2, ' ').is_err());
    assert!(ToonDialect::new(2, '\n').is_err());
}

fn inside_quotes(doc: &str, at: usize) -> bool {
    let line_start = doc[..at].rfind('\n').map_or(0, |p| p + 1);
    let mut inside = false;
    let mut escaped = false;
    for c in doc[line_start..at].chars() {
        match c {
            _ if escaped => escaped = false,
            '\\' if inside => escaped = true,
            '"' => inside = !inside,
            _ => {}
        }
    }
    inside
}

/// Rewrites every `[N]` header in `doc` by `delta`, one at a time.
fn length_mutations(doc: &str, delta: i64) -> Vec<String> {
    let mut out = Vec::new();
    let bytes = doc.as_bytes();
    for (i, _) in doc.match_indices('[') {
        let digits = bytes[i + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
        if digits == 0 || bytes.get(i + 1 + digits) != Some(&b']') || inside_quotes(doc, i) {
            continue;
        }
        let n: i64 = doc[i + 1..i + 1 + digits].parse().unwrap();
        if n + delta < 0 {
            continue;
        }
        out.push(format!("{}[{}]{}", &doc[..i], n + delta, &doc[i + 1 + digits + 1..]));
    }
    out
}

#[test]
fn strictness_on_fixed_document() {
    let doc = serialize_toon(
        &parse_toon("a[2]: 1,2\nb[1]{x,y}:\n  1,2\nc[2]:\n  - k: 1\n  - [1]: 3", &d()).unwrap(),
        &d(),
    )
    .unwrap();
    let mutated: Vec<_> = length_mutations(&doc, 1)
        .into_iter()
        .chain(length_mutations(&doc, -1))
        .collect();
    assert_eq!(mutated.len(), 8);
    for m in mutated {
        assert!(!validate_toon(&m, &d()).valid, "accepted:\n{m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn round_trip(v in testgen::document()) {
        let text = serialize_toon(&v, &d()).unwrap();
        let back = parse_toon(&text, &d()).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert!(normalized_equal(&back, &v), "text:\n{}", text);
    }

    #[test]
    fn round_trip_sequence_root(items in prop::collection::vec(testgen::value(), 0..5)) {
        let v = ValueNode::Sequence(items);
        let text = serialize_toon(&v, &d()).unwrap();
        let back = parse_toon(&text, &d()).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert!(normalized_equal(&back, &v), "text:\n{}", text);
    }

    #[test]
    fn length_mutation_is_rejected(v in testgen::document()) {
        let text = serialize_toon(&v, &d()).unwrap();
        for m in length_mutations(&text, 1).into_iter().chain(length_mutations(&text, -1)) {
            prop_assert!(!validate_toon(&m, &d()).valid, "mutation accepted:\n{}", m);
        }
    }
}
