use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;

/// Final answer of a query, after aggregation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Answer {
    Bool(bool),
    Num(Decimal),
    Str(String),
    #[serde(rename = "set")]
    StrSet(BTreeSet<String>),
}

/// Trim and collapse internal whitespace runs to a single space.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Canonical form: strings trimmed with whitespace runs collapsed; set
/// members likewise (empty members dropped); numbers are already normalized
/// by `Decimal`. Idempotent.
pub fn canonicalize_answer(a: &Answer) -> Answer {
    match a {
        Answer::Bool(b) => Answer::Bool(*b),
        Answer::Num(d) => Answer::Num(*d),
        Answer::Str(s) => Answer::Str(collapse_whitespace(s)),
        Answer::StrSet(set) => Answer::StrSet(
            set.iter()
                .map(|m| collapse_whitespace(m))
                .filter(|m| !m.is_empty())
                .collect(),
        ),
    }
}

/// Canonical string rendering. Booleans become uppercase TRUE/FALSE here
/// (and only here); numbers render without trailing zeros; sets render as
/// their sorted members joined by ", ".
pub fn render_answer(a: &Answer) -> String {
    match canonicalize_answer(a) {
        Answer::Bool(true) => "TRUE".to_string(),
        Answer::Bool(false) => "FALSE".to_string(),
        Answer::Num(d) => d.to_string(),
        Answer::Str(s) => s,
        Answer::StrSet(set) => set.into_iter().collect::<Vec<_>>().join(", "),
    }
}

/// Equality underlying exact match: identical canonical forms, with
/// cross-variant comparison falling back to canonical string renderings
/// (so `Num(2)` equals `Str("2")` and `Bool(true)` equals `Str("TRUE")`).
pub fn answer_equal(a: &Answer, b: &Answer) -> bool {
    let (ca, cb) = (canonicalize_answer(a), canonicalize_answer(b));
    match (&ca, &cb) {
        (Answer::Bool(x), Answer::Bool(y)) => x == y,
        (Answer::Num(x), Answer::Num(y)) => x == y,
        (Answer::StrSet(x), Answer::StrSet(y)) => x == y,
        _ => render_answer(&ca) == render_answer(&cb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn whitespace_normalization() {
        assert_eq!(
            canonicalize_answer(&Answer::Str("  Ted  Mann ".into())),
            Answer::Str("Ted Mann".into())
        );
        assert_eq!(collapse_whitespace("a\t b\n\nc"), "a b c");
    }

    #[test]
    fn canonical_number_form() {
        let a = Answer::Num("2.0".parse().unwrap());
        assert_eq!(render_answer(&a), "2");
        assert!(answer_equal(&a, &Answer::Num(Decimal::from(2i64))));
    }

    #[test]
    fn cross_variant_equality() {
        assert!(answer_equal(&Answer::Num(Decimal::from(2i64)), &Answer::Str("2".into())));
        assert!(answer_equal(&Answer::Bool(true), &Answer::Str("TRUE".into())));
        assert!(!answer_equal(&Answer::Bool(true), &Answer::Str("true".into())));
        assert!(!answer_equal(&Answer::Num(Decimal::from(2i64)), &Answer::Str("two".into())));
    }

    #[test]
    fn set_semantics_order_insensitive() {
        let a = Answer::StrSet(["a".to_string(), "b".to_string()].into());
        let b = Answer::StrSet(["b".to_string(), "a".to_string()].into());
        assert!(answer_equal(&a, &b));
    }

    #[test]
    fn set_members_are_canonicalized() {
        let a = Answer::StrSet(["  Ted  Mann ".to_string(), "".to_string()].into());
        assert_eq!(
            canonicalize_answer(&a),
            Answer::StrSet(["Ted Mann".to_string()].into())
        );
    }

    #[test]
    fn serde_representation() {
        let a = Answer::Num("2".parse().unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"type":"num","value":"2"}"#);
        let s = Answer::StrSet(["x".to_string()].into());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"type":"set","value":["x"]}"#);
    }

    fn arb_answer() -> impl Strategy<Value = Answer> {
        prop_oneof![
            any::<bool>().prop_map(Answer::Bool),
            (-1_000_000i64..1_000_000).prop_map(|n| Answer::Num(Decimal::from(n))),
            "[ a-zA-Z0-9]{0,12}".prop_map(Answer::Str),
            proptest::collection::btree_set("[ a-z]{0,8}", 0..4).prop_map(Answer::StrSet),
        ]
    }

    proptest! {
        // Idempotence over random answers.
        #[test]
        fn canonicalize_is_idempotent(a in arb_answer()) {
            let once = canonicalize_answer(&a);
            let twice = canonicalize_answer(&once);
            prop_assert_eq!(once, twice);
        }

        // answer_equal is an equivalence relation on canonical answers.
        #[test]
        fn equality_is_reflexive_symmetric(a in arb_answer(), b in arb_answer()) {
            prop_assert!(answer_equal(&a, &a));
            prop_assert_eq!(answer_equal(&a, &b), answer_equal(&b, &a));
        }

        #[test]
        fn equality_is_transitive(a in arb_answer(), b in arb_answer(), c in arb_answer()) {
            if answer_equal(&a, &b) && answer_equal(&b, &c) {
                prop_assert!(answer_equal(&a, &c));
            }
        }
    }
}
