//! Parsers over the fuzz seed corpus and over mutated and random input.

use proptest::prelude::*;
use sigma_toda::io::*;
use sigma_toda::{Error, HyperellipticCurve, C64};
use std::path::PathBuf;

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

fn e1() -> HyperellipticCurve {
    let z = C64::new(0.0, 0.0);
    HyperellipticCurve::new(1, vec![z, C64::new(-1.0, 0.0), z]).unwrap()
}

fn all_seeds() -> Vec<String> {
    ["parse_curve", "parse_conic", "parse_state", "parse_points"]
        .iter()
        .flat_map(|t| corpus(t).into_iter().map(|(_, s)| s))
        .collect()
}

/// Every parser on one input; none may panic.
fn feed(s: &str) {
    if let Ok(c) = parse_curve(s) {
        assert_eq!(parse_curve(&curve_to_json(&c)).unwrap().genus(), c.genus());
    }
    let _ = parse_conic(s);
    if let Ok(st) = parse_state(s) {
        assert_eq!(st.a.len(), st.b.len());
    }
    let _ = parse_points(s, &e1());
}

#[test]
fn curve_seeds() {
    for (name, text) in corpus("parse_curve") {
        let r = parse_curve(&text);
        match name.as_str() {
            "e1.json" => assert_eq!(r.unwrap().genus(), 1),
            "q5.json" | "complex.json" => assert_eq!(r.unwrap().genus(), 2),
            "degenerate.json" => assert!(matches!(r, Err(Error::DegenerateCurve(..)))),
            _ => assert!(r.is_err(), "{name}"),
        }
    }
}

#[test]
fn conic_seeds() {
    for (name, text) in corpus("parse_conic") {
        let r = parse_conic(&text);
        match name.as_str() {
            "triangle.json" | "general.json" => assert!(r.is_ok(), "{name}"),
            _ => assert!(r.is_err(), "{name}"),
        }
    }
}

#[test]
fn state_seeds() {
    for (name, text) in corpus("parse_state") {
        let r = parse_state(&text);
        match name.as_str() {
            "three.json" => assert_eq!(r.unwrap().len(), 3),
            "free.json" => assert_eq!(r.unwrap().t, C64::new(0.5, 0.0)),
            _ => assert!(r.is_err(), "{name}"),
        }
    }
}

#[test]
fn point_seeds() {
    for (name, text) in corpus("parse_points") {
        let r = parse_points(&text, &e1());
        match name.as_str() {
            "one.json" => assert_eq!(r.unwrap().len(), 1),
            "branch.json" => assert_eq!(r.unwrap().len(), 3),
            "empty.json" => assert!(r.unwrap().is_empty()),
            _ => assert!(matches!(r, Err(Error::InvalidInput(_))), "{name}"),
        }
    }
}

#[test]
fn rejects_unknown_fields_and_non_finite() {
    assert!(parse_curve(r#"{"genus": 1, "lambda": [[0, 0], [-1, 0], [0, 0]], "extra": 1}"#).is_err());
    assert!(parse_curve(r#"{"genus": 1, "lambda": [[0, 0], [-1, 0], [1e400, 0]]}"#).is_err());
    assert!(parse_curve(r#"{"genus": 99, "lambda": []}"#).is_err());
    assert!(parse_state(r#"{"a": [[1, 0]], "b": [[0, 0]], "t": [1, 0, 0]}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_text_never_panics(s in "\\PC{0,200}") {
        feed(&s);
    }

    #[test]
    fn json_like_text_never_panics(s in r#"[\[\]{}",:0-9.eE+\- a-z]{0,120}"#) {
        feed(&s);
    }

    #[test]
    fn mutated_seeds_never_panic(pick in any::<prop::sample::Index>(), edits in prop::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..6)) {
        let seeds = all_seeds();
        let mut bytes = seeds[pick.index(seeds.len())].clone().into_bytes();
        for (at, b) in edits {
            let i = at.index(bytes.len());
            bytes[i] = b;
        }
        if let Ok(s) = std::str::from_utf8(&bytes) {
            feed(s);
        }
    }
}
