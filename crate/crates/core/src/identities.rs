//! Chart-level identity suites checked in the free differential polynomial
//! ring. Coefficient functions are even symbols; a symbol in variable `y`
//! stands for a `V`-chart function already evaluated at `f_UV`, so its
//! `x`-derivative picks up the factor `ζ²`.

use crate::diffpoly::{dp_reduce, DiffPolynomial as DP, DiffSymbol, RewriteSystem};
use crate::error::{Error, Result};
use crate::grassmann::{morphism_compose, OddMonomial, Superfield, Supermorphism};
use crate::report::{Entry, Report};

pub const SUITES: [&str; 5] =
    ["lemma-intersections", "corollary-zeta12", "prop-bracket-triple", "prop-sigma-bracket", "sec-4.2.2"];

/// Tag carried by rules that encode the commutation hypothesis
/// `ψ¹′ψ² = ψ¹ψ²′` and its stratified consequences.
pub const COMMUTATION_TAG: &str = "psi-commutation";

fn sym(name: &str, var: &str) -> DiffSymbol {
    DiffSymbol::even(name, var)
}

fn p(name: &str, var: &str) -> DP {
    DP::symbol(&sym(name, var))
}

fn x(name: &str) -> DP {
    p(name, "x")
}

fn y(name: &str) -> DP {
    p(name, "y")
}

fn dy(name: &str) -> DP {
    DP::symbol(&sym(name, "y").derivative())
}

fn dx(name: &str) -> DP {
    DP::symbol(&sym(name, "x").derivative())
}

fn c(n: i64) -> DP {
    DP::from_int(n)
}

fn half() -> DP {
    DP::from_ratio(1, 2)
}

/// `a′b − ab′` for given values and derivatives.
fn wronskian(a: &DP, da: &DP, b: &DP, db: &DP) -> DP {
    &(da * b) - &(a * db)
}

struct Identity {
    name: String,
    lhs: DP,
    rhs: DP,
    rules: RewriteSystem,
}

struct Suite {
    identities: Vec<Identity>,
    outputs: Vec<(String, DP)>,
}

fn run(id: &str, suite: Suite, drop_tag: Option<&str>) -> Report {
    let mut rep = Report::new(&format!("verify-identities {id}"));
    for it in suite.identities {
        let rules = match drop_tag {
            Some(t) => it.rules.without_tag(t),
            None => it.rules,
        };
        let r = dp_reduce(&(&it.lhs - &it.rhs), &rules);
        rep.push(Entry::new(&it.name, id, None, r.render(), r.is_zero()));
    }
    for (name, v) in suite.outputs {
        rep.output(&name, v.render());
    }
    if let Some(t) = drop_tag {
        rep.note(format!("rules tagged `{t}` removed"));
    }
    rep
}

/// Run one suite by identifier.
pub fn verify_identity_suite(id: &str) -> Result<Report> {
    Ok(run(id, build(id)?, None))
}

/// Run a suite with every rule carrying `tag` removed.
pub fn verify_identity_suite_without(id: &str, tag: &str) -> Result<Report> {
    Ok(run(id, build(id)?, Some(tag)))
}

fn build(id: &str) -> Result<Suite> {
    match id {
        "lemma-intersections" => lemma_intersections(),
        "corollary-zeta12" => corollary_zeta12(),
        "prop-bracket-triple" => prop_bracket_triple(),
        "prop-sigma-bracket" | "prop-bracket" => prop_sigma_bracket(),
        "sec-4.2.2" => sec_4_2_2(),
        _ => Err(Error::UnknownSuite(id.to_string())),
    }
}

/// Reversal rules on a pair: `ψ^i = −ζψ^i_r`, `g = −ζ²g_r` in terms of the
/// reversed data `(·)_r = (·)_VU∘f`.
fn reversal_rules() -> Result<RewriteSystem> {
    let zeta = x("zeta");
    RewriteSystem::builder("x")
        .chain("y", &zeta * &zeta)
        .symbol(sym("psi1", "x"), -&(&zeta * &y("psi1r")), "psi-reversal")
        .symbol(sym("psi2", "x"), -&(&zeta * &y("psi2r")), "psi-reversal")
        .symbol(sym("g", "x"), -&(&(&zeta * &zeta) * &y("gr")), "g-reversal")
        .build()
}

/// `W_r = ψ¹_r,y ψ²_r − ψ¹_r ψ²_r,y`.
fn w_r() -> DP {
    wronskian(&y("psi1r"), &dy("psi1r"), &y("psi2r"), &dy("psi2r"))
}

/// `ζ¹²_UV = −ζ²ζ¹²_r − ζ′g_r + ζ³W_r`.
fn z_lemma() -> DP {
    let zeta = x("zeta");
    let z2 = &zeta * &zeta;
    &(&(-&(&z2 * &y("zr"))) - &(&dx("zeta") * &y("gr"))) + &(&(&z2 * &zeta) * &w_r())
}

fn lemma_intersections() -> Result<Suite> {
    let zeta = x("zeta");
    let z2 = &zeta * &zeta;
    let rev = reversal_rules()?;
    // The reversed transition is superconformal with ζ_VU∘f = 1/ζ:
    // 2ζ_r ζ¹²_r = g_r,y + ψ¹_r,y ψ²_r − ψ¹_r ψ²_r,y.
    let vu_sc = RewriteSystem::builder("x")
        .chain("y", z2.clone())
        .symbol(sym("psi1", "x"), -&(&zeta * &y("psi1r")), "psi-reversal")
        .symbol(sym("psi2", "x"), -&(&zeta * &y("psi2r")), "psi-reversal")
        .symbol(sym("g", "x"), -&(&z2 * &y("gr")), "g-reversal")
        .symbol(sym("zr", "y"), &(&half() * &zeta) * &(&dy("gr") + &w_r()), "vu-superconformal")
        .build()?;

    let pair_g = &(-&(&z2 * &y("gr"))) - &(&zeta * &(&(&y("psi1r") * &x("psi2")) - &(&y("psi2r") * &x("psi1"))));
    let e1 = &dx("g") + &wronskian(&x("psi1"), &dx("psi1"), &x("psi2"), &dx("psi2"));
    let e3 = &(-&(&(&c(2) * &zeta) * &(&dx("zeta") * &y("gr"))))
        - &(&z2.pow(2) * &(&(&dy("gr") - &(&dy("psi1r") * &y("psi2r"))) + &(&y("psi1r") * &dy("psi2r"))));
    let e4 = &(&(-&(&(&c(2) * &z2) * &(&zeta * &y("zr")))) - &(&(&c(2) * &zeta) * &(&dx("zeta") * &y("gr"))))
        + &(&(&c(2) * &z2.pow(2)) * &w_r());
    let identities = vec![
        Identity { name: "g-reversal".into(), lhs: pair_g, rhs: -&(&z2 * &y("gr")), rules: rev.clone() },
        Identity { name: "psi-wronskian-expansion".into(), lhs: e1, rhs: e3.clone(), rules: rev.clone() },
        Identity { name: "reversed-superconformality".into(), lhs: e3, rhs: e4.clone(), rules: vu_sc },
        Identity { name: "zeta12-relation".into(), lhs: e4, rhs: &(&c(2) * &zeta) * &z_lemma(), rules: rev },
    ];
    Ok(Suite { identities, outputs: vec![("zeta12_UV".into(), z_lemma())] })
}

fn corollary_zeta12() -> Result<Suite> {
    let zeta = x("zeta");
    let zr = y("zetar");
    // Direct expansion of the ξ₁ξ₂θ slot of ρ_VU∘ρ_UV = id, solved for ζ¹²_UV.
    let inner = &(&(&(&(-&(&dy("zetar") * &(&(&x("f1") * &x("psi2")) - &(&x("f2") * &x("psi1")))))
        + &(&(&dy("zetar") * &x("g")) * &zeta))
        + &(&dy("psi1r") * &x("f2")))
        - &(&dy("psi2r") * &x("f1")))
        + &(&zeta * &y("zr"));
    let z_direct = -&(&zeta * &inner);
    let rules = RewriteSystem::builder("x")
        .chain("y", &zeta * &zeta)
        .precedence("zetar", 2)
        .symbol(sym("f1", "x"), &zeta * &x("psi1"), "superconformal")
        .symbol(sym("f2", "x"), &zeta * &x("psi2"), "superconformal")
        .symbol(sym("psi1", "x"), -&(&zeta * &y("psi1r")), "psi-reversal")
        .symbol(sym("psi2", "x"), -&(&zeta * &y("psi2r")), "psi-reversal")
        .symbol(sym("g", "x"), -&(&(&zeta * &zeta) * &y("gr")), "g-reversal")
        .symbol(sym("zetar", "y").derivative(), -&(&dx("zeta") * &zr.pow(4)), "zeta-reversal")
        .monomial(&[sym("zeta", "x"), sym("zetar", "y")], c(1), "zeta-reversal")
        .build()?;
    // The relation without the Wronskian term.
    let z_short = &(-&(&(&zeta * &zeta) * &y("zr"))) - &(&dx("zeta") * &y("gr"));
    let cubic = &(&zeta * &(&zeta * &zeta)) * &w_r();

    // Under ψ¹′ψ² = ψ¹ψ²′ the order-2 relation gives g′ = 2ζζ¹².
    let sc_rhs = &half() * &(&dx("g") + &wronskian(&x("psi1"), &dx("psi1"), &x("psi2"), &dx("psi2")));
    let hyp = RewriteSystem::builder("x")
        .precedence("psi1", 2)
        .precedence("psi2", 1)
        .precedence("z", 10)
        .monomial(&[sym("zeta", "x"), sym("z", "x")], sc_rhs, "superconformal")
        .monomial(
            &[sym("psi1", "x").derivative(), sym("psi2", "x")],
            &x("psi1") * &dx("psi2"),
            COMMUTATION_TAG,
        )
        .build()?;
    let diff = dp_reduce(&(&z_direct - &z_short), &rules);
    let identities = vec![
        Identity { name: "direct-equals-lemma".into(), lhs: z_direct.clone(), rhs: z_lemma(), rules: rules.clone() },
        Identity { name: "short-form-difference".into(), lhs: &z_direct - &z_short, rhs: cubic, rules },
        Identity {
            name: "g-derivative-under-commutation".into(),
            lhs: dx("g"),
            rhs: &(&c(2) * &zeta) * &x("z"),
            rules: hyp,
        },
    ];
    Ok(Suite { identities, outputs: vec![("direct-minus-short-form".into(), diff)] })
}

type Sf = Superfield<DP>;

fn order2_symbolic(src: (&str, &str), tgt: (&str, &str), names: [&str; 8]) -> Result<Supermorphism<DP>> {
    let v = src.1;
    let [f, zeta, f1, f2, g, psi1, psi2, z] = names.map(|n| p(n, v));
    let d = crate::grassmann::Order2 { f, zeta, f1, f2, g12: g, psi1, psi2, zeta12: z };
    Supermorphism::order2(src, tgt, &d)
}

fn get(s: &Sf, idx: &[usize], theta: bool) -> DP {
    let m = OddMonomial::xis(idx);
    s.get(if theta { m.with_theta() } else { m })
}

fn prop_bracket_triple() -> Result<Suite> {
    // UV data in x, VW data in y (already evaluated at f_UV).
    let uv = order2_symbolic(("U", "x"), ("V", "y"), ["f", "zeta", "f1", "f2", "g", "psi1", "psi2", "z"])?;
    let vw = order2_symbolic(("V", "y"), ("W", "w"), ["F", "Z", "F1", "F2", "G", "P1", "P2", "ZZ"])?;
    let uw = morphism_compose(&vw, &uv)?;
    let (zeta, zz) = (x("zeta"), y("Z"));
    let spin = || RewriteSystem::builder("x").symbol(sym("F", "y").derivative(), &zz * &zz, "spin");
    let sc = spin()
        .symbol(sym("F1", "y"), &zz * &y("P1"), "superconformal")
        .symbol(sym("F2", "y"), &zz * &y("P2"), "superconformal")
        .symbol(sym("f1", "x"), &zeta * &x("psi1"), "superconformal")
        .symbol(sym("f2", "x"), &zeta * &x("psi2"), "superconformal")
        .build()?;
    let spin = spin().build()?;

    let g_uw = get(uw.plus(), &[1, 2], false);
    let zz2 = &zz * &zz;
    let g_exp = &(&(&zz2 * &x("g")) + &y("G")) + &(&(&x("psi2") * &y("F1")) - &(&x("psi1") * &y("F2")));
    let mut ids = vec![
        Identity { name: "g-composition".into(), lhs: g_uw.clone(), rhs: g_exp, rules: spin.clone() },
        Identity { name: "zeta-composition".into(), lhs: uw.zeta(), rhs: &zz * &zeta, rules: spin.clone() },
    ];
    for i in 1..=2usize {
        let (psi_i, f_i, big_p, big_f) = (x(&format!("psi{i}")), x(&format!("f{i}")), y(&format!("P{i}")), y(&format!("F{i}")));
        let psi_uw = get(uw.minus(), &[i], false);
        let f_uw = get(uw.plus(), &[i], true);
        ids.push(Identity {
            name: format!("psi-composition-{i}"),
            lhs: psi_uw.clone(),
            rhs: &(&zz * &psi_i) + &big_p,
            rules: spin.clone(),
        });
        ids.push(Identity {
            name: format!("f-composition-{i}"),
            lhs: f_uw.clone(),
            rhs: &(&zz2 * &f_i) + &(&zeta * &big_f),
            rules: spin.clone(),
        });
        ids.push(Identity {
            name: format!("f-equals-zeta-psi-{i}"),
            lhs: f_uw,
            rhs: &uw.zeta() * &psi_uw,
            rules: sc.clone(),
        });
    }
    let delta_g = &(&y("G") - &g_uw) + &(&zz2 * &x("g"));
    let bracket = &zz * &(&(&x("psi1") * &y("P2")) - &(&x("psi2") * &y("P1")));
    ids.push(Identity { name: "delta-g-bracket".into(), lhs: delta_g, rhs: bracket, rules: sc });
    Ok(Suite { identities: ids, outputs: vec![("g_UW".into(), g_uw)] })
}

/// `W(ψ)` for `ψ = S − ζs`, grouped by powers of `ζ`:
/// `ζ′(S¹s² − s¹S²) + ζ(S¹s²′ − s¹′S²) + ζ²(W_y(S) + W(s)) + ζ³(s¹S²_y − S¹_y s²)`.
fn stratified_wronskian(big: [&str; 2], small: [&str; 2]) -> DP {
    let zeta = x("zeta");
    let (s1, s2) = (y(big[0]), y(big[1]));
    let (ds1, ds2) = (dy(big[0]), dy(big[1]));
    let (t1, t2) = (x(small[0]), x(small[1]));
    let (dt1, dt2) = (dx(small[0]), dx(small[1]));
    let a = &dx("zeta") * &(&(&s1 * &t2) - &(&t1 * &s2));
    let b = &zeta * &(&(&s1 * &dt2) - &(&dt1 * &s2));
    let cc = &(&zeta * &zeta) * &(&wronskian(&s1, &ds1, &s2, &ds2) + &wronskian(&t1, &dt1, &t2, &dt2));
    let d = &zeta.pow(3) * &(&(&t1 * &ds2) - &(&ds1 * &t2));
    &(&(&a + &b) + &cc) + &d
}

fn psi_wronskian_x() -> DP {
    wronskian(&x("psi1"), &dx("psi1"), &x("psi2"), &dx("psi2"))
}

fn strata_outputs(prefix: &str, w: &DP) -> Vec<(String, DP)> {
    let mut out = Vec::new();
    for (kp, part) in w.collect_by(&sym("zeta", "x").derivative()) {
        for (k, coeff) in part.collect_by(&sym("zeta", "x")) {
            out.push((format!("{prefix}[zeta'^{kp} zeta^{k}]"), coeff));
        }
    }
    out
}

fn prop_sigma_bracket() -> Result<Suite> {
    let (a, b) = (x("zeta_UV"), y("zeta_VW"));
    let sig = |i: usize, ch: &str, var: &str| p(&format!("sigma{i}_{ch}"), var);
    let mut cochain = RewriteSystem::builder("x").symbol(sym("zeta_UW", "x"), &b * &a, "cocycle");
    for i in 1..=2 {
        cochain = cochain
            .symbol(sym(&format!("psi{i}_UV"), "x"), &sig(i, "V", "y") - &(&a * &sig(i, "U", "x")), "cochain")
            .symbol(sym(&format!("psi{i}_VW"), "y"), &sig(i, "W", "w") - &(&b * &sig(i, "V", "y")), "cochain");
    }
    let with_comm = cochain
        .clone()
        .precedence("sigma1_U", 1)
        .precedence("sigma1_V", 4)
        .precedence("sigma1_W", 16)
        .precedence("sigma2_U", 1)
        .precedence("sigma2_V", 2)
        .precedence("sigma2_W", 4)
        .monomial(&[sym("sigma1_V", "y"), sym("sigma2_U", "x")], &sig(1, "U", "x") * &sig(2, "V", "y"), COMMUTATION_TAG)
        .monomial(&[sym("sigma1_W", "w"), sym("sigma2_V", "y")], &sig(1, "V", "y") * &sig(2, "W", "w"), COMMUTATION_TAG)
        .monomial(&[sym("sigma1_W", "w"), sym("sigma2_U", "x")], &sig(1, "U", "x") * &sig(2, "W", "w"), COMMUTATION_TAG)
        .build()?;
    let cochain = cochain.build()?;

    let bracket = &b * &(&(&x("psi1_UV") * &y("psi2_VW")) - &(&x("psi2_UV") * &y("psi1_VW")));
    let h = |z: DP, l: &str, lv: &str, r: &str, rv: &str| {
        &z * &(&(&sig(1, l, lv) * &sig(2, r, rv)) - &(&sig(2, l, lv) * &sig(1, r, rv)))
    };
    let h_uv = h(a.clone(), "U", "x", "V", "y");
    let h_vw = h(b.clone(), "V", "y", "W", "w");
    let h_uw = h(x("zeta_UW"), "U", "x", "W", "w");
    let delta_h = &(&h_vw - &h_uw) + &(&(&b * &b) * &h_uv);
    let d = |i: usize, l: &str, lv: &str, r: &str, rv: &str, z: &DP| &sig(i, r, rv) - &(z * &sig(i, l, lv));
    let expansion = &b
        * &(&(&d(1, "U", "x", "V", "y", &a) * &d(2, "V", "y", "W", "w", &b))
            - &(&d(2, "U", "x", "V", "y", &a) * &d(1, "V", "y", "W", "w", &b)));

    // Two-chart Wronskian with ψ = σ_V − ζσ_U.
    let zeta = x("zeta");
    let two = RewriteSystem::builder("x")
        .chain("y", &zeta * &zeta)
        .symbol(sym("psi1", "x"), &y("S1") - &(&zeta * &x("s1")), "cochain")
        .symbol(sym("psi2", "x"), &y("S2") - &(&zeta * &x("s2")), "cochain")
        .build()?;
    let w = dp_reduce(&psi_wronskian_x(), &two);
    let lowest = w
        .collect_by(&sym("zeta", "x").derivative())
        .remove(&1)
        .unwrap_or_default()
        .collect_by(&sym("zeta", "x"))
        .remove(&0)
        .unwrap_or_default();

    let ids = vec![
        Identity { name: "bracket-expansion".into(), lhs: bracket.clone(), rhs: expansion, rules: cochain.clone() },
        Identity { name: "bracket-is-coboundary".into(), lhs: bracket.clone(), rhs: delta_h, rules: cochain },
        Identity {
            name: "wronskian-strata".into(),
            lhs: psi_wronskian_x(),
            rhs: stratified_wronskian(["S1", "S2"], ["s1", "s2"]),
            rules: two,
        },
        Identity {
            name: "zeta-prime-stratum".into(),
            lhs: lowest,
            rhs: &(&y("S1") * &x("s2")) - &(&x("s1") * &y("S2")),
            rules: RewriteSystem::empty("x"),
        },
        Identity { name: "bracket-vanishes-under-commutation".into(), lhs: bracket, rhs: DP::zero(), rules: with_comm },
    ];
    let mut outputs = vec![("h_UV".to_string(), h_uv)];
    outputs.extend(strata_outputs("W", &w));
    Ok(Suite { identities: ids, outputs })
}

/// Splitting-equation substitutions on one overlap:
/// `ψ^i = ζφ^i_U − Φ^i`, `f^i = ζψ^i`, with `Φ = φ_V∘f`.
fn splitting_base() -> crate::diffpoly::RewriteBuilder {
    let zeta = x("zeta");
    RewriteSystem::builder("x")
        .chain("y", &zeta * &zeta)
        .symbol(sym("psi1", "x"), &(&zeta * &x("phi1_U")) - &y("Phi1"), "splitting")
        .symbol(sym("psi2", "x"), &(&zeta * &x("phi2_U")) - &y("Phi2"), "splitting")
        .symbol(sym("f1", "x"), &zeta * &x("psi1"), "superconformal")
        .symbol(sym("f2", "x"), &zeta * &x("psi2"), "superconformal")
}

fn commutation(b: crate::diffpoly::RewriteBuilder) -> crate::diffpoly::RewriteBuilder {
    let (p1, p2) = (sym("phi1_U", "x"), sym("phi2_U", "x"));
    let (q1, q2) = (sym("Phi1", "y"), sym("Phi2", "y"));
    b.precedence("phi1_U", 4)
        .precedence("phi2_U", 1)
        .precedence("Phi1", 2)
        .precedence("Phi2", 1)
        .monomial(&[p1.clone(), q2.clone()], &x("phi2_U") * &y("Phi1"), COMMUTATION_TAG)
        .monomial(&[p1.derivative(), p2.clone()], &x("phi1_U") * &dx("phi2_U"), COMMUTATION_TAG)
        .monomial(&[q1.derivative(), q2.clone()], &y("Phi1") * &dy("Phi2"), COMMUTATION_TAG)
        .monomial(&[p1.clone(), q2.derivative()], &x("phi2_U") * &dy("Phi1"), COMMUTATION_TAG)
        .monomial(&[p1.derivative(), q2], &dx("phi2_U") * &y("Phi1"), COMMUTATION_TAG)
}

fn sec_4_2_2() -> Result<Suite> {
    let zeta = x("zeta");
    let z2 = &zeta * &zeta;
    let base = splitting_base().build()?;
    let hyp = commutation(splitting_base()).build()?;
    let (q1, q2, p1, p2) = (y("Phi1"), y("Phi2"), x("phi1_U"), x("phi2_U"));
    let w_v = wronskian(&q1, &dy("Phi1"), &q2, &dy("Phi2"));
    let w_u = wronskian(&p1, &dx("phi1_U"), &p2, &dx("phi2_U"));

    let lam_psi = &(&q1 * &x("psi2")) - &(&q2 * &x("psi1"));
    let lam_psi_exp = &zeta * &(&(&q1 * &p2) - &(&q2 * &p1));
    let phi_f = &(&dy("Phi1") * &x("f2")) - &(&dy("Phi2") * &x("f1"));
    let phi_f_exp = &(-&(&zeta * &w_v)) - &(&z2 * &(&(&p1 * &dy("Phi2")) - &(&p2 * &dy("Phi1"))));

    // Closing formula: the odd ξ₁ξ₂θ splitting equation
    // ζ¹² + Φ¹_y f² − Φ²_y f¹ + ζΦ¹² = ζφ¹²_U + ζ′λ¹²_U, with λ¹²_V∘f − ζ²λ¹²_U = −G.
    let closing_symbols = || {
        splitting_base()
            .symbol(
                sym("g", "x"),
                &(&(&z2 * &x("l")) - &y("L")) - &(&zeta * &(&(&p2 * &q1) - &(&p1 * &q2))),
                "splitting",
            )
            .symbol(sym("phi12_U", "x"), &half() * &(&dx("l") + &w_u), "closing")
            .symbol(sym("Phi12", "y"), &half() * &(&dy("L") + &w_v), "closing")
    };
    let sc_rhs = dp_reduce(&(&half() * &(&dx("g") + &psi_wronskian_x())), &closing_symbols().build()?);
    let closing = closing_symbols()
        .precedence("z", 1000)
        .monomial(&[sym("zeta", "x"), sym("z", "x")], sc_rhs, "superconformal")
        .build()?;
    let o2_lhs = &(&(&x("z") + &phi_f) + &(&zeta * &y("Phi12")));
    let o2_rhs = &(&zeta * &x("phi12_U")) + &(&dx("zeta") * &x("l"));
    let closing_lhs = &(&c(2) * &zeta) * &(o2_lhs - &o2_rhs);

    let w = dp_reduce(&psi_wronskian_x(), &base);
    let ids = vec![
        Identity {
            name: "f-splitting-consistency-1".into(),
            lhs: x("f1"),
            rhs: &(&z2 * &p1) - &(&zeta * &q1),
            rules: base.clone(),
        },
        Identity { name: "lambda-psi-expansion".into(), lhs: lam_psi.clone(), rhs: lam_psi_exp, rules: base.clone() },
        Identity { name: "lambda-psi-pairing".into(), lhs: lam_psi, rhs: DP::zero(), rules: hyp.clone() },
        Identity { name: "phi-f-expansion".into(), lhs: phi_f.clone(), rhs: phi_f_exp, rules: base.clone() },
        Identity { name: "phi-f-pairing".into(), lhs: phi_f, rhs: DP::zero(), rules: hyp },
        Identity {
            name: "wronskian-strata".into(),
            lhs: psi_wronskian_x(),
            rhs: stratified_wronskian(["Phi1", "Phi2"], ["phi1_U", "phi2_U"]),
            rules: base,
        },
        Identity { name: "closing-formula".into(), lhs: closing_lhs, rhs: DP::zero(), rules: closing },
    ];
    Ok(Suite { identities: ids, outputs: strata_outputs("W", &w) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for id in SUITES {
            let r = verify_identity_suite(id).unwrap();
            assert!(r.pass, "{}", r.render_human());
        }
    }

    #[test]
    fn unknown_suite() {
        assert_eq!(verify_identity_suite("nope"), Err(Error::UnknownSuite("nope".into())));
    }

    #[test]
    fn commutation_rules_are_needed() {
        for id in ["sec-4.2.2", "prop-sigma-bracket", "corollary-zeta12"] {
            let r = verify_identity_suite_without(id, COMMUTATION_TAG).unwrap();
            assert!(!r.pass, "{id}");
        }
        let r = verify_identity_suite_without("sec-4.2.2", COMMUTATION_TAG).unwrap();
        let failed: Vec<_> = r.failures().map(|e| e.tag.clone()).collect();
        assert_eq!(failed, ["lambda-psi-pairing", "phi-f-pairing"]);
        println!("{}", r.render_human());
    }
}
