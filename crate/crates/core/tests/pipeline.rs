//! End-to-end runs on random atlases: build, check, serialize, split.

mod common;

use superdeform::atlas::Atlas;
use superdeform::deform::{
    build_construction, build_from_cochains, check_all, extract_obstruction, solve_splitting, twist_by_g12,
    verify_splitting,
};
use superdeform::format::{atlas_to_raw, load_document_str, render_text, splitting_to_raw};

use common::*;

fn independent_three_chart(seed: u64) -> Atlas {
    let mut r = rng(seed);
    let base = Atlas::model(cover(true), 2).unwrap();
    let (s1, s2) = (polynomial_section(&mut r, &base, 1), polynomial_section(&mut r, &base, 1));
    let (p1, p2) = (forward_coboundary(&base, &s1), forward_coboundary(&base, &s2));
    let g = add(&bracket_primitive(&base, &s1, &s2), &cocycle(&mut r, &base, 2));
    build_from_cochains(&base, &p1, &p2, &g).unwrap()
}

#[test]
fn three_chart_independent_psi_checks_and_splits() {
    for seed in 0..6 {
        let a = independent_three_chart(seed);
        let rep = check_all(&a).unwrap();
        assert!(rep.pass, "seed {seed}:\n{}", rep.render_human());
        let s = solve_splitting(&a).unwrap();
        let v = verify_splitting(&a, &s).unwrap();
        assert!(v.pass, "seed {seed}:\n{}", v.render_human());
        assert!(v.entries.iter().all(|e| e.residual == "0"));
    }
}

#[test]
fn twisted_three_chart_atlas_still_splits() {
    let mut r = rng(40);
    let a = independent_three_chart(7);
    let base = Atlas::model(cover(true), 2).unwrap();
    let t = twist_by_g12(&a, &cocycle(&mut r, &base, 2)).unwrap();
    assert!(check_all(&t).unwrap().pass);
    let s = solve_splitting(&t).unwrap();
    assert!(verify_splitting(&t, &s).unwrap().pass);
}

#[test]
fn text_round_trip_preserves_atlases() {
    let mut r = rng(11);
    for n in 0..8 {
        let base = Atlas::model(cover(n % 2 == 1), 2).unwrap();
        let a = build_construction(&base, &cocycle(&mut r, &base, 1)).unwrap();
        let a = twist_by_g12(&a, &cocycle(&mut r, &base, 2)).unwrap();
        let raw = atlas_to_raw(&a);
        let text = render_text(&raw);
        let back = load_document_str(&text).unwrap().resolve().unwrap();
        assert_eq!(atlas_to_raw(&back), raw, "sample {n}:\n{text}");
        assert_eq!(render_text(&atlas_to_raw(&back)), text);
    }
}

#[test]
fn json_round_trip_preserves_atlases() {
    let a = independent_three_chart(3);
    let raw = atlas_to_raw(&a);
    let json = serde_json::to_string(&raw).unwrap();
    let back = load_document_str(&json).unwrap().resolve().unwrap();
    assert_eq!(atlas_to_raw(&back), raw);
}

#[test]
fn solved_splitting_survives_serialization() {
    let a = independent_three_chart(5);
    let s = solve_splitting(&a).unwrap();
    let mut raw = atlas_to_raw(&a);
    raw.splittings = splitting_to_raw(&s);
    let doc = load_document_str(&render_text(&raw)).unwrap();
    let reloaded = doc.splitting.clone().unwrap();
    let rep = verify_splitting(&doc.resolve().unwrap(), &reloaded).unwrap();
    assert!(rep.pass, "{}", rep.render_human());
}

#[test]
fn obstruction_is_defined_on_every_pair() {
    let a = independent_three_chart(9);
    let o = extract_obstruction(&a).unwrap();
    for ((u, v), _) in a.transitions() {
        assert!(!o.render_pair(u, v).is_empty());
    }
}
