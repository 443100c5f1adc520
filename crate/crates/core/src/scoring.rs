//! Render, Syntax, GCS and GCS_env scores, plus γ sweeps.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::formats::{parse_format, FormatKind};
use crate::value::{flatten, normalized_equal, FlatValue, KeyPath, ValueNode};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("a sweep needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("the two score lines do not cross inside [0, 1]")]
    NoCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            beta: 0.8,
            gamma: 0.5,
        }
    }
}

impl ScoreWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, ScoringError> {
        let w = Self { alpha, beta, gamma };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ScoringError::InvalidWeights(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if (self.alpha + self.beta - 1.0).abs() > 1e-12 {
            return Err(ScoringError::InvalidWeights(format!(
                "alpha + beta must be 1, got {}",
                self.alpha + self.beta
            )));
        }
        Ok(())
    }
}

/// Scores for one record. The sustainability fields are `None` for
/// degenerate (zero-token) records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBundle {
    pub render: u8,
    pub syntax: f64,
    pub gcs: f64,
    pub x_intensity: Option<f64>,
    pub ees: Option<f64>,
    pub gcs_env: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SyntaxOptions {
    /// Count a pair as satisfied when its path exists, whatever the value.
    pub keys_only: bool,
}

pub fn render_score(output: &str, format: FormatKind) -> u8 {
    u8::from(parse_format(output, format).is_ok())
}

pub fn syntax_score(output: &str, format: FormatKind, expected: &ValueNode) -> f64 {
    syntax_score_with(output, format, expected, SyntaxOptions::default())
}

pub fn syntax_score_with(output: &str, format: FormatKind, expected: &ValueNode, opts: SyntaxOptions) -> f64 {
    match parse_format(output, format) {
        Ok(parsed) => syntax_of_parsed(&parsed, format, expected, opts),
        Err(_) => 0.0,
    }
}

/// Recall of expected `(path, value)` pairs in an already parsed output.
pub fn syntax_of_parsed(parsed: &ValueNode, format: FormatKind, expected: &ValueNode, opts: SyntaxOptions) -> f64 {
    let want = flatten(expected);
    let got: HashMap<KeyPath, FlatValue> = if format == FormatKind::Xml {
        let content = unwrap_xml_root(parsed, expected);
        flatten(&align_xml(expected, content)).into_iter().collect()
    } else {
        flatten(parsed).into_iter().collect()
    };
    let hits = want
        .iter()
        .filter(|(path, e)| match got.get(path) {
            None => false,
            Some(_) if opts.keys_only => true,
            Some(g) if format == FormatKind::Xml => xml_leaf_match(e, g),
            Some(g) => leaf_match(e, g),
        })
        .count();
    hits as f64 / want.len() as f64
}

fn leaf_match(e: &FlatValue, g: &FlatValue) -> bool {
    match (e, g) {
        (FlatValue::Scalar(a), FlatValue::Scalar(b)) => normalized_equal(a, b),
        (FlatValue::EmptyContainer(a), FlatValue::EmptyContainer(b)) => a == b,
        _ => false,
    }
}

/// XML carries only text, so expected scalars are compared by their
/// canonical string form. An empty element stands for an empty container.
fn xml_leaf_match(e: &FlatValue, g: &FlatValue) -> bool {
    match (e, g) {
        (FlatValue::Scalar(a), FlatValue::Scalar(b)) => a.scalar_text() == b.scalar_text(),
        (FlatValue::EmptyContainer(_), FlatValue::Scalar(ValueNode::Text(t))) => t.is_empty(),
        (FlatValue::EmptyContainer(a), FlatValue::EmptyContainer(b)) => a == b,
        _ => false,
    }
}

/// Parsed XML is `{root: content}`. The root element name is part of the
/// expected structure only when expected is itself `{root: ...}`.
fn unwrap_xml_root<'a>(parsed: &'a ValueNode, expected: &ValueNode) -> &'a ValueNode {
    let Some(root) = parsed.as_mapping().filter(|m| m.len() == 1) else {
        return parsed;
    };
    let (name, content) = root.iter().next().expect("one entry");
    match expected.as_mapping() {
        Some(e) if e.len() == 1 && e.contains_key(name) => parsed,
        _ => content,
    }
}

/// Undoes XML's lossy collapses where expected says what was meant: a
/// single repeated element reads back as a lone value, not a sequence.
fn align_xml(expected: &ValueNode, got: &ValueNode) -> ValueNode {
    match (expected, got) {
        (ValueNode::Sequence(es), ValueNode::Sequence(gs)) => ValueNode::Sequence(
            gs.iter()
                .enumerate()
                .map(|(i, g)| match es.get(i) {
                    Some(e) => align_xml(e, g),
                    None => g.clone(),
                })
                .collect(),
        ),
        (ValueNode::Sequence(es), g) if !es.is_empty() && !matches!(g, ValueNode::Text(t) if t.is_empty()) => {
            ValueNode::Sequence(vec![align_xml(&es[0], g)])
        }
        (ValueNode::Mapping(em), ValueNode::Mapping(gm)) => ValueNode::mapping(gm.iter().map(|(k, g)| {
            let v = match em.get(k) {
                Some(e) => align_xml(e, g),
                None => g.clone(),
            };
            (k.to_string(), v)
        })),
        _ => got.clone(),
    }
}

/// `alpha * render + beta * syntax`. Render is real-valued so aggregate
/// means can be composed too.
pub fn gcs(render: f64, syntax: f64, w: &ScoreWeights) -> f64 {
    w.alpha * render + w.beta * syntax
}

pub fn gcs_env(gcs: f64, ees: f64, gamma: f64) -> f64 {
    (1.0 - gamma) * gcs + gamma * ees
}

fn sweep_gammas(steps: usize) -> Result<impl Iterator<Item = f64>, ScoringError> {
    if steps < 2 {
        return Err(ScoringError::TooFewSteps(steps));
    }
    Ok((0..steps).map(move |i| i as f64 / (steps - 1) as f64))
}

/// `gcs_env` at `gamma = i / (steps - 1)`.
pub fn gamma_sweep(gcs: f64, ees: f64, steps: usize) -> Result<Vec<(f64, f64)>, ScoringError> {
    Ok(sweep_gammas(steps)?.map(|g| (g, gcs_env(gcs, ees, g))).collect())
}

/// A `(gcs, ees)` pair, usually per-format aggregate means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub gcs: f64,
    pub ees: f64,
}

/// The γ at which the two `gcs_env` lines meet.
pub fn gamma_crossing(a: ScorePair, b: ScorePair) -> Result<f64, ScoringError> {
    let dg = a.gcs - b.gcs;
    let de = a.ees - b.ees;
    let denom = dg - de;
    if denom == 0.0 {
        return Err(ScoringError::NoCrossing);
    }
    let gamma = dg / denom;
    if (0.0..=1.0).contains(&gamma) {
        Ok(gamma)
    } else {
        Err(ScoringError::NoCrossing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepComparison {
    /// `(gamma, gcs_env_a, gcs_env_b)`.
    pub points: Vec<(f64, f64, f64)>,
    /// Sign flips of `a - b` between consecutive non-zero points.
    pub sign_changes: usize,
    pub crossing: Option<f64>,
}

pub fn compare_sweeps(a: ScorePair, b: ScorePair, steps: usize) -> Result<SweepComparison, ScoringError> {
    let points: Vec<_> = sweep_gammas(steps)?
        .map(|g| (g, gcs_env(a.gcs, a.ees, g), gcs_env(b.gcs, b.ees, g)))
        .collect();
    let mut sign_changes = 0;
    let mut last = 0.0f64;
    for &(_, ea, eb) in &points {
        let d = ea - eb;
        if d != 0.0 {
            if last != 0.0 && d.signum() != last.signum() {
                sign_changes += 1;
            }
            last = d;
        }
    }
    Ok(SweepComparison {
        points,
        sign_changes,
        crossing: gamma_crossing(a, b).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::serialize_format;
    use crate::value::testgen;
    use proptest::prelude::*;

    fn ab() -> ValueNode {
        ValueNode::mapping([("a", ValueNode::int(1)), ("b", ValueNode::int(2))])
    }

    #[test]
    fn render_examples() {
        assert_eq!(render_score("{\"a\":1}", FormatKind::Json), 1);
        assert_eq!(render_score("{\"a\":1", FormatKind::Json), 0);
        assert_eq!(render_score("xs[3]: 1,2", FormatKind::Toon), 0);
    }

    #[test]
    fn syntax_examples() {
        assert_eq!(syntax_score("{\"a\":1}", FormatKind::Json, &ab()), 0.5);
        let a = ValueNode::mapping([("a", ValueNode::int(1))]);
        assert_eq!(syntax_score("{\"a\":1}", FormatKind::Json, &a), 1.0);
        assert_eq!(syntax_score("not json", FormatKind::Json, &ab()), 0.0);
    }

    #[test]
    fn syntax_is_recall_with_exact_indices() {
        let expected = ValueNode::mapping([("xs", ValueNode::Sequence(vec![ValueNode::int(10), ValueNode::int(20)]))]);
        assert_eq!(
            syntax_score("{\"xs\":[10,20],\"extra\":1}", FormatKind::Json, &expected),
            1.0
        );
        assert_eq!(syntax_score("{\"xs\":[20,10]}", FormatKind::Json, &expected), 0.0);
        assert_eq!(syntax_score("{\"xs\":[10]}", FormatKind::Json, &expected), 0.5);
        assert_eq!(syntax_score("{\"xs\":[10.0,20]}", FormatKind::Json, &expected), 1.0);
        assert_eq!(syntax_score("{\"xs\":[\"10\",20]}", FormatKind::Json, &expected), 0.5);
    }

    #[test]
    fn keys_only_ignores_values() {
        let opts = SyntaxOptions { keys_only: true };
        assert_eq!(
            syntax_score_with("{\"a\":9,\"b\":\"x\"}", FormatKind::Json, &ab(), opts),
            1.0
        );
        assert_eq!(syntax_score_with("{\"a\":9}", FormatKind::Json, &ab(), opts), 0.5);
    }

    #[test]
    fn empty_expected_container_counts_once() {
        let empty = ValueNode::mapping(Vec::<(String, ValueNode)>::new());
        assert_eq!(syntax_score("{}", FormatKind::Json, &empty), 1.0);
        assert_eq!(syntax_score("[]", FormatKind::Json, &empty), 0.0);
    }

    #[test]
    fn xml_compares_text_renderings() {
        let expected = ValueNode::mapping([
            ("id", ValueNode::int(7)),
            ("ok", ValueNode::Bool(true)),
            ("tags", ValueNode::Sequence(vec![ValueNode::text("x")])),
            ("meta", ValueNode::mapping(Vec::<(String, ValueNode)>::new())),
        ]);
        let out = "<record><id>7</id><ok>true</ok><tags>x</tags><meta/></record>";
        assert_eq!(syntax_score(out, FormatKind::Xml, &expected), 1.0);
        let wrong = "<record><id>7.0</id><ok>yes</ok></record>";
        assert_eq!(syntax_score(wrong, FormatKind::Xml, &expected), 0.0);
    }

    #[test]
    fn xml_keeps_root_when_expected_names_it() {
        let expected = ValueNode::mapping([("r", ValueNode::mapping([("a", ValueNode::text("1"))]))]);
        assert_eq!(syntax_score("<r><a>1</a></r>", FormatKind::Xml, &expected), 1.0);
        assert_eq!(syntax_score("<q><a>1</a></q>", FormatKind::Xml, &expected), 0.0);
    }

    #[test]
    fn gcs_examples() {
        let w = ScoreWeights::default();
        assert!((gcs(0.990, 0.802, &w) - 0.840).abs() < 1e-3);
        assert_eq!(gcs(1.0, 1.0, &w), 1.0);
        assert!((gcs(1.0, 0.5, &w) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn gcs_env_examples() {
        assert!((gcs_env(0.840, 0.926, 0.5) - 0.883).abs() < 1e-3);
        assert_eq!(gcs_env(0.3, 0.9, 0.0), 0.3);
        assert_eq!(gcs_env(0.3, 0.9, 1.0), 0.9);
    }

    #[test]
    fn sweep_examples() {
        let s = gamma_sweep(0.8, 0.9, 3).unwrap();
        let want = [(0.0, 0.8), (0.5, 0.85), (1.0, 0.9)];
        for ((g, v), (wg, wv)) in s.iter().zip(want) {
            assert_eq!(*g, wg);
            assert!((v - wv).abs() < 1e-15);
        }
        assert_eq!(gamma_sweep(0.8, 0.9, 1), Err(ScoringError::TooFewSteps(1)));
    }

    #[test]
    fn crossing_examples() {
        let json = ScorePair { gcs: 0.840, ees: 0.926 };
        let toon = ScorePair { gcs: 0.513, ees: 0.980 };
        // independent closed form
        let expected = (0.840 - 0.513) / ((0.840 - 0.513) + (0.980 - 0.926));
        let g = gamma_crossing(json, toon).unwrap();
        assert!((g - expected).abs() < 1e-12);
        assert!((g - 0.858).abs() < 5e-4);
        let cmp = compare_sweeps(json, toon, 101).unwrap();
        assert_eq!(cmp.sign_changes, 1);
        assert_eq!(gamma_crossing(json, json), Err(ScoringError::NoCrossing));
        let dominated = ScorePair { gcs: 0.1, ees: 0.1 };
        assert_eq!(gamma_crossing(json, dominated), Err(ScoringError::NoCrossing));
    }

    #[test]
    fn weights_are_validated() {
        assert!(ScoreWeights::new(0.3, 0.8, 0.5).is_err());
        assert!(ScoreWeights::new(0.5, 0.5, 1.5).is_err());
        assert!(ScoreWeights::new(0.0, 1.0, 0.0).is_ok());
        assert!(ScoreWeights::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn gcs_env_monotone_in_gamma(g in 0.0f64..=1.0, e in 0.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (x, y) = (gcs_env(g, e, lo), gcs_env(g, e, hi));
            if e >= g { prop_assert!(y >= x - 1e-15); }
            if e <= g { prop_assert!(y <= x + 1e-15); }
        }

        #[test]
        fn perfect_scores_give_one(alpha in 0.0f64..=1.0) {
            let w = ScoreWeights { alpha, beta: 1.0 - alpha, gamma: 0.5 };
            prop_assert!((gcs(1.0, 1.0, &w) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn self_consistency(v in testgen::document()) {
            for f in [FormatKind::Json, FormatKind::Yaml, FormatKind::Toon] {
                let s = serialize_format(&v, f).unwrap();
                prop_assert_eq!(render_score(&s, f), 1);
                prop_assert_eq!(syntax_score(&s, f, &v), 1.0);
            }
        }

        #[test]
        fn syntax_bounded_and_order_invariant(v in testgen::document(), out in testgen::document()) {
            let s = crate::formats::serialize_json(&out);
            let score = syntax_score(&s, FormatKind::Json, &v);
            prop_assert!((0.0..=1.0).contains(&score));
            let reversed = match &v {
                ValueNode::Mapping(m) => ValueNode::mapping(m.clone().into_entries().into_iter().rev()),
                other => other.clone(),
            };
            prop_assert_eq!(score, syntax_score(&s, FormatKind::Json, &reversed));
            prop_assert_eq!(score == 1.0, flatten(&v).iter().all(|(p, e)| {
                flatten(&out).iter().any(|(q, g)| p == q && leaf_match(e, g))
            }));
        }
    }
}
