//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdict lines always reach the output.

mod common;

use std::process::ExitCode;

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use superdeform::atlas::{
    alternate, atlas_coboundary, bracket_psi, check_cochain_structure, check_cocycle, check_intersection_identities,
    g_cochain, psi, Atlas, AtlasCochain,
};
use superdeform::cech::{h1_dimension, solve_coboundary, to_leading, CechCochain, LineBundleModel, Verdict};
use superdeform::deform::{
    build_construction, build_from_cochains, extract_ks, genus_warning, solve_splitting, solve_splitting_with,
    twist_by_g12, verify_splitting, SplitOptions,
};
use superdeform::format::{load_document_str, parse_differential};
use superdeform::grassmann::{OddMonomial, Order2, Supermorphism};
use superdeform::identities::{verify_identity_suite, verify_identity_suite_without, COMMUTATION_TAG, SUITES};
use superdeform::scalar::{GaussianRational as GR, RationalFunction as RF};
use superdeform::superconformal::{check_superconformal, RelationTag};
use superdeform::error::ObstructionStage;
use superdeform::Error;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ------------------------------------------------------------------ 1

#[derive(Clone, Copy)]
enum Slot {
    F,
    Zeta,
    F1,
    F2,
    G12,
    Psi1,
    Psi2,
    Zeta12,
}

const SLOTS: [Slot; 8] = [Slot::F, Slot::Zeta, Slot::F1, Slot::F2, Slot::G12, Slot::Psi1, Slot::Psi2, Slot::Zeta12];

fn slot(d: &mut Order2<RF>, s: Slot) -> &mut RF {
    match s {
        Slot::F => &mut d.f,
        Slot::Zeta => &mut d.zeta,
        Slot::F1 => &mut d.f1,
        Slot::F2 => &mut d.f2,
        Slot::G12 => &mut d.g12,
        Slot::Psi1 => &mut d.psi1,
        Slot::Psi2 => &mut d.psi2,
        Slot::Zeta12 => &mut d.zeta12,
    }
}

fn morphism(d: &Order2<RF>) -> Supermorphism<RF> {
    Supermorphism::order2(("U", "x"), ("V", "y"), d).unwrap()
}

/// Where a perturbation `δ` of one slot may show up, the monomial where it
/// must show up, and the exact residual there.
fn predicted(s: Slot, d: &Order2<RF>, delta: &RF) -> (Vec<OddMonomial>, OddMonomial, RF) {
    let (one, x1, x2, x12) =
        (OddMonomial::ONE, OddMonomial::xis(&[1]), OddMonomial::xis(&[2]), OddMonomial::xis(&[1, 2]));
    let z = &d.zeta;
    match s {
        Slot::F => (vec![one], one, delta.derivative()),
        Slot::Zeta => {
            (vec![one, x1, x2, x12], one, -&(&(&(&RF::from_int(2) * z) * delta) + &(delta * delta)))
        }
        Slot::F1 => (vec![x1], x1, delta.clone()),
        Slot::F2 => (vec![x2], x2, delta.clone()),
        Slot::G12 => (vec![x12], x12, delta.derivative()),
        Slot::Psi1 => (vec![x1, x12], x1, -&(z * delta)),
        Slot::Psi2 => (vec![x2, x12], x2, -&(z * delta)),
        Slot::Zeta12 => (vec![x12], x12, -&(&(&RF::from_int(2) * z) * delta)),
    }
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut perturbations = 0;
    for n in 0..500 {
        let d = solved_order2(&mut r);
        let res = check_superconformal(&morphism(&d)).map_err(|e| e.to_string())?;
        ensure(res.iter().all(|e| e.pass), || format!("sample {n} fails unperturbed"))?;
        for s in SLOTS {
            let mut delta = nonzero_laurent(&mut r, "x", -2, 2);
            if matches!(s, Slot::F | Slot::G12) && delta.derivative().is_zero() {
                delta = &delta + &RF::var("x");
            }
            if matches!(s, Slot::Zeta) && delta == &RF::from_int(-2) * &d.zeta {
                delta = &delta + &RF::one();
            }
            let mut p = d.clone();
            let v = slot(&mut p, s);
            *v = &*v + &delta;
            let (allowed, primary, value) = predicted(s, &d, &delta);
            let out = check_superconformal(&morphism(&p)).map_err(|e| e.to_string())?;
            let failing: Vec<_> = out.iter().filter(|e| !e.pass).collect();
            ensure(failing.iter().all(|e| allowed.contains(&e.monomial)), || {
                format!("sample {n}: perturbation leaks outside {:?}", allowed)
            })?;
            let hit = failing.iter().find(|e| e.monomial == primary);
            ensure(hit.is_some_and(|e| e.residual == value), || {
                format!("sample {n}: expected residual {} at {}", value.render(), primary.render())
            })?;
            let tag = hit.map(|e| e.tag).unwrap();
            let want = match primary.xi_degree() {
                0 => RelationTag::ZetaSquared,
                2 => RelationTag::Order2G12,
                _ => RelationTag::FEqualsZetaPsi,
            };
            ensure(tag == want, || format!("sample {n}: tag {}", tag.as_str()))?;
            perturbations += 1;
        }
    }
    Ok(format!("500 solved morphisms pass; {perturbations} single-coefficient perturbations fail where predicted"))
}

// ------------------------------------------------------------------ 2

fn all_pass(a: &Atlas) -> Result<(), String> {
    for (name, rep) in [
        ("cocycle", check_cocycle(a)),
        ("intersections", check_intersection_identities(a)),
        ("cochains", check_cochain_structure(a)),
    ] {
        let rep = rep.map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("{name}: {}", rep.render_human()))?;
    }
    Ok(())
}

fn bracket_matches(a: &Atlas) -> Result<usize, String> {
    let dg = atlas_coboundary(a, &g_cochain(a, 1, 2)).map_err(|e| e.to_string())?;
    let mut n = 0;
    for (u, v, w) in a.cover().triples() {
        let b = bracket_psi(a, (u, v, w), 1, 2).map_err(|e| e.to_string())?;
        ensure(dg.get(&[u, v, w]) == b, || format!("delta g != [psi1, psi2] on {u}{v}{w}"))?;
        n += 1;
    }
    Ok(n)
}

/// A construction-then-twist atlas, or a twist of an atlas with independent
/// odd cochains and `g¹²` = bracket primitive + coboundary.
fn random_atlas(r: &mut impl Rng, three: bool, independent: bool) -> Result<Atlas, Error> {
    let base = Atlas::model(cover(three), 2)?;
    let a = if independent {
        let (s1, s2) = (polynomial_section(r, &base, 1), polynomial_section(r, &base, 1));
        let (p1, p2) = (forward_coboundary(&base, &s1), forward_coboundary(&base, &s2));
        let g = add(&bracket_primitive(&base, &s1, &s2), &cocycle(r, &base, 2));
        build_from_cochains(&base, &p1, &p2, &g)?
    } else {
        build_construction(&base, &cocycle(r, &base, 1))?
    };
    twist_by_g12(&a, &cocycle(r, &base, 2))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let (mut triples, mut nonzero) = (0, 0);
    for n in 0..200 {
        let (three, independent) = (n % 2 == 1, n % 4 >= 2);
        let a = random_atlas(&mut r, three, independent).map_err(|e| format!("sample {n}: {e}"))?;
        all_pass(&a).map_err(|e| format!("sample {n}: {e}"))?;
        triples += bracket_matches(&a)?;
        if a.cover().triples().any(|t| !bracket_psi(&a, t, 1, 2).unwrap().is_zero()) {
            nonzero += 1;
        }
    }
    Ok(format!("200 atlases pass all checks; delta g12 = [psi1, psi2] on {triples} triples ({nonzero} atlases with a nonzero bracket)"))
}

// ------------------------------------------------------------------ 3

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    for n in 0..100 {
        let base = Atlas::model(cover(n % 2 == 1), 2).unwrap();
        let theta = cocycle(&mut r, &base, 1);
        let a = build_construction(&base, &theta).map_err(|e| e.to_string())?;
        let ks = extract_ks(&a).map_err(|e| e.to_string())?;
        let full = alternate(&base, &theta).unwrap();
        for c in &ks.components {
            ensure(c.kappa.values == full.values, || format!("sample {n}: KS {} != theta {}", c.kappa.render(), full.render()))?;
        }
        let t = twist_by_g12(&a, &cocycle(&mut r, &base, 2)).map_err(|e| e.to_string())?;
        ensure(extract_ks(&t).map_err(|e| e.to_string())? == ks, || format!("sample {n}: twist changed KS"))?;
    }
    Ok("KS(construction(theta)) = (theta, theta) and KS is twist-invariant on 100 samples".into())
}

// ------------------------------------------------------------------ 4

/// Gap coefficients `x^m`, `k < m < 0`, of `−x·ψ`, read off directly.
fn oracle_witness(psi: &RF, k: i64) -> Vec<GR> {
    let z = -&(&RF::var("x") * psi);
    let terms = z.laurent_terms().expect("Laurent");
    (0..h1_dimension(k))
        .map(|j| {
            let m = -1 - j as i64;
            terms.iter().find(|(e, _)| *e == m).map(|(_, c)| c.clone()).unwrap_or_else(GR::zero)
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    for n in 0..100 {
        let (three, independent) = (n % 2 == 1, n % 4 >= 2);
        let a = random_atlas(&mut r, three, independent).map_err(|e| format!("sample {n}: {e}"))?;
        let s = solve_splitting(&a).map_err(|e| format!("sample {n}: {e}"))?;
        let rep = verify_splitting(&a, &s).map_err(|e| e.to_string())?;
        ensure(rep.pass && rep.entries.iter().all(|e| e.residual == "0"), || format!("sample {n}: {}", rep.render_human()))?;
    }
    let mut refused = 0;
    for n in 0..50 {
        let k = -2 - (n % 4) as i64;
        let base = Atlas::model(cover(false), 2).unwrap();
        let mut theta = cocycle(&mut r, &base, 1);
        // Guarantee a nonzero gap coefficient in the leading frame.
        let bump = RF::monomial("x", nonzero_scalar(&mut r), -2 - (n % 2) as i64);
        let v = &theta.get(&["U", "V"]) + &bump;
        theta = theta.with(&["U", "V"], v);
        let a = build_construction(&base, &theta).map_err(|e| e.to_string())?;
        let psi1 = psi(a.transition("U", "V").unwrap(), 1);
        let want = oracle_witness(&psi1, k);
        let opts = SplitOptions { half_twist: k, ..SplitOptions::default() };
        match solve_splitting_with(&a, opts) {
            Err(Error::ObstructionNonzero { stage: ObstructionStage::Linear(1), witness }) => {
                ensure(witness.verdict == Verdict::Nontrivial && witness.h1 == want, || {
                    format!("k={k}: witness {:?}, oracle {:?}", witness.h1, want)
                })?;
                let c = AtlasCochain::new(1, 1).with(&["U", "V"], -&psi1);
                let lead = to_leading(&c, LineBundleModel::new(k)).unwrap();
                let direct = solve_coboundary(&lead, LineBundleModel::new(k)).unwrap();
                ensure(direct == *witness, || "solve_coboundary disagrees with the refusal witness".into())?;
                refused += 1;
            }
            other => return Err(format!("k={k}: expected refusal, got {:?}", other.map(|_| ()))),
        }
    }
    Ok(format!("100 coboundary atlases split with zero residuals; {refused} negative-twist runs refused with the oracle witness"))
}

// ------------------------------------------------------------------ 5

/// Rank of integer vectors by exact elimination.
fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rk = 0;
    for c in 0..cols {
        let Some(p) = (rk..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rk, p);
        let piv = rows[rk][c].clone();
        for i in 0..rows.len() {
            if i != rk && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &piv;
                for j in 0..cols {
                    let t = &f * &rows[rk][j];
                    rows[i][j] -= t;
                }
            }
        }
        rk += 1;
    }
    rk
}

const WINDOW: i64 = 12;

/// `dim` of Laurent polynomials in `[−W, W]` modulo `δ` of sections: the
/// images `δ(x^a, 0) = −x^a` and `δ(0, y^b) = (−1)^b x^{k−b}`.
fn oracle_h1(k: i64) -> usize {
    let width = (2 * WINDOW + 1) as usize;
    let unit = |m: i64, s: i64| {
        let mut v = vec![BigRational::zero(); width];
        v[(m + WINDOW) as usize] = BigRational::from_integer(s.into());
        v
    };
    let mut rows = Vec::new();
    for a in 0..=WINDOW {
        rows.push(unit(a, -1));
    }
    for b in 0.. {
        let m = k - b;
        if m < -WINDOW {
            break;
        }
        if m <= WINDOW {
            rows.push(unit(m, if b % 2 == 0 { 1 } else { -1 }));
        }
    }
    width - rank(rows)
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for k in -6..=3 {
        let b = LineBundleModel::new(k);
        let mut witnesses = Vec::new();
        for m in -WINDOW..=WINDOW {
            let z = CechCochain::zero(1, b).with(&["U", "V"], RF::monomial("x", GR::one(), m)).unwrap();
            let cls = solve_coboundary(&z, b).map_err(|e| e.to_string())?;
            if !cls.is_trivial() {
                witnesses.push(cls.h1.iter().map(|c| c.re.clone()).collect::<Vec<_>>());
            }
        }
        let solver = rank(witnesses);
        let oracle = oracle_h1(k);
        let formula = (-k - 1).max(0) as usize;
        ensure(solver == oracle && oracle == formula, || format!("k={k}: solver {solver}, oracle {oracle}, formula {formula}"))?;
        lines.push(format!("{k}:{solver}"));
    }
    Ok(format!("nontrivial class counts match max(0, -k-1) and the oracle [{}]", lines.join(" ")))
}

// ------------------------------------------------------------------ 6

fn criterion_6() -> Outcome {
    for id in SUITES {
        let rep = verify_identity_suite(id).map_err(|e| e.to_string())?;
        ensure(rep.pass, || rep.render_human())?;
    }
    let rep = verify_identity_suite_without("sec-4.2.2", COMMUTATION_TAG).map_err(|e| e.to_string())?;
    let var = |n: &str| if n.starts_with("Phi") { "y".to_string() } else { "x".to_string() };
    let p = |s: &str| parse_differential(s, &var).unwrap();
    let expected = [
        ("lambda-psi-pairing", p("zeta*(Phi1*phi2_U - Phi2*phi1_U)")),
        ("phi-f-pairing", p("-zeta*(Phi1'*Phi2 - Phi1*Phi2') - zeta^2*(phi1_U*Phi2' - phi2_U*Phi1')")),
    ];
    let failing: Vec<_> = rep.failures().collect();
    ensure(failing.len() == expected.len(), || rep.render_human())?;
    for (e, (tag, want)) in failing.iter().zip(&expected) {
        ensure(e.tag == *tag && p(&e.residual) == *want && !want.is_zero(), || {
            format!("{}: residual {} is not the stratified term", e.tag, e.residual)
        })?;
    }
    Ok("five suites reduce to zero; without psi-commutation sec-4.2.2 leaves the two zeta-stratified residuals".into())
}

// ------------------------------------------------------------------ 7

const TORUS_LIKE: &str = "order 2\ngenus 1\nchart U x\nchart V y\npair U V\n  f = x + 1\n  zeta = 1\n  psi1 = 1\n  psi2 = x\n  f1 = 1\n  f2 = x\n  zeta12 = -1/2\nend\n";

fn criterion_7() -> Outcome {
    let a = load_document_str(TORUS_LIKE).and_then(|d| d.resolve()).map_err(|e| e.to_string())?;
    let w = genus_warning(&a).ok_or("no warning on a constant-zeta genus-1 atlas")?;
    ensure(w.contains("genus != 1"), || w.clone())?;
    all_pass(&a)?;
    ensure(matches!(solve_splitting(&a), Err(Error::UnsupportedCover(_))), || "solver made a claim off the model cover".into())?;
    // A model-cover atlas labeled genus 1: warned, and only the exact
    // solve-and-verify is reported.
    let mut b = random_atlas(&mut rng(7), false, true).map_err(|e| e.to_string())?;
    b.set_genus(Some(1));
    ensure(genus_warning(&b).is_some(), || "no warning on declared genus 1".into())?;
    let s = solve_splitting(&b).map_err(|e| e.to_string())?;
    ensure(verify_splitting(&b, &s).map_err(|e| e.to_string())?.pass, || "split does not verify".into())?;
    Ok("genus-1-like inputs warn about g != 1; only exact checks are reported".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("superconformality iff", criterion_1),
        ("cocycle identities", criterion_2),
        ("construction fidelity", criterion_3),
        ("constructive splitting", criterion_4),
        ("cech dimension", criterion_5),
        ("proof identities", criterion_6),
        ("genus caveat", criterion_7),
    ];
    let mut ok = true;
    // `cargo test --test acceptance -- 3 5` runs only the listed criteria.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = std::time::Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("criterion {} ({name}): PASS [{secs:.1}s] {msg}", i + 1),
            Err(msg) => {
                ok = false;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {msg}", i + 1);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
