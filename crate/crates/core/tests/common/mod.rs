//! Random inputs shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use superdeform::atlas::{atlas_coboundary, model_base, Atlas, AtlasCochain, Cover};
use superdeform::grassmann::Order2;
use superdeform::scalar::{rf_compose, GaussianRational as GR, RationalFunction as RF};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small rational, occasionally with an imaginary part.
pub fn scalar(r: &mut impl Rng) -> GR {
    let re = GR::from_ratio(r.gen_range(-5..=5), r.gen_range(1..=4));
    if r.gen_bool(0.15) {
        &re + &(&GR::from_int(r.gen_range(-2..=2)) * &GR::i())
    } else {
        re
    }
}

pub fn nonzero_scalar(r: &mut impl Rng) -> GR {
    loop {
        let c = scalar(r);
        if !c.is_zero() {
            return c;
        }
    }
}

/// Laurent polynomial in `var` with exponents in `lo..=hi`.
pub fn laurent(r: &mut impl Rng, var: &str, lo: i64, hi: i64) -> RF {
    let mut terms = Vec::new();
    for k in lo..=hi {
        if r.gen_bool(0.6) {
            terms.push((k, scalar(r)));
        }
    }
    RF::from_laurent(var, &terms)
}

pub fn nonzero_laurent(r: &mut impl Rng, var: &str, lo: i64, hi: i64) -> RF {
    loop {
        let f = laurent(r, var, lo, hi);
        if !f.is_zero() {
            return f;
        }
    }
}

/// A coefficient function: a Laurent polynomial plus, sometimes, a simple
/// pole away from zero.
pub fn coefficient(r: &mut impl Rng) -> RF {
    let mut f = laurent(r, "x", -2, 2);
    if r.gen_bool(0.3) {
        let root = RF::from_int(r.gen_range(1..=4));
        f = &f + &(&RF::constant(nonzero_scalar(r)) / &(&RF::var("x") - &root));
    }
    f
}

/// `(f, ζ)` with `f′ = ζ²`, from one of two closed families:
/// polynomial `ζ`, or `ζ = s(cx + d)^m`.
pub fn spin_pair(r: &mut impl Rng) -> (RF, RF) {
    let x = RF::var("x");
    if r.gen_bool(0.5) {
        let zeta = loop {
            let z = laurent(r, "x", 0, 2);
            if !z.is_zero() {
                break z;
            }
        };
        let sq = (&zeta * &zeta).laurent_terms().unwrap();
        let integral: Vec<(i64, GR)> =
            sq.iter().map(|(k, c)| (k + 1, c * &GR::from_int(k + 1).inv())).collect();
        (RF::from_laurent("x", &integral), zeta)
    } else {
        let s = nonzero_scalar(r);
        let c = loop {
            let c = r.gen_range(-3..=3);
            if c != 0 {
                break c;
            }
        };
        let d = r.gen_range(-3..=3);
        let m: i64 = [-3, -2, -1, 0, 1, 2][r.gen_range(0..6)];
        let lin = &(&RF::from_int(c) * &x) + &RF::from_int(d);
        let zeta = &RF::constant(s.clone()) * &lin.pow(m).unwrap();
        let scale = &(&s * &s) * &GR::from_int(c * (2 * m + 1)).inv();
        (&RF::constant(scale) * &lin.pow(2 * m + 1).unwrap(), zeta)
    }
}

/// Random order-2 transition data solved for superconformality.
pub fn solved_order2(r: &mut impl Rng) -> Order2<RF> {
    let (f, zeta) = spin_pair(r);
    let (psi1, psi2, g12) = (coefficient(r), coefficient(r), coefficient(r));
    let w = &(&psi1.derivative() * &psi2) - &(&psi1 * &psi2.derivative());
    let zeta12 = &(&g12.derivative() + &w) / &(&RF::from_int(2) * &zeta);
    Order2 { f1: &zeta * &psi1, f2: &zeta * &psi2, f, zeta, g12, psi1, psi2, zeta12 }
}

pub fn cover(three: bool) -> Cover {
    if three {
        Cover::three_chart()
    } else {
        Cover::two_chart()
    }
}

/// Polynomial 0-cochain: `σ_U ∈ ℚ(i)[x]`, `σ_V ∈ ℚ(i)[y]`, `σ_W ∈ ℚ(i)[z]`.
pub fn polynomial_section(r: &mut impl Rng, a: &Atlas, weight: i64) -> AtlasCochain {
    let mut c = AtlasCochain::new(weight, 0);
    for ch in a.cover().charts() {
        c = c.with(&[ch.name.as_str()], laurent(r, &ch.var, 0, 3));
    }
    c
}

/// `δσ` restricted to forward pairs.
pub fn forward_coboundary(a: &Atlas, s: &AtlasCochain) -> AtlasCochain {
    let full = atlas_coboundary(a, s).unwrap();
    let mut c = AtlasCochain::new(s.weight, 1);
    for (u, v) in a.cover().forward_pairs() {
        c = c.with(&[u, v], full.get(&[u, v]));
    }
    c
}

/// A weight-`k` 1-cochain on the model cover: a coboundary, plus on the
/// two-chart cover an arbitrary Laurent polynomial.
pub fn cocycle(r: &mut impl Rng, a: &Atlas, weight: i64) -> AtlasCochain {
    let s = polynomial_section(r, a, weight);
    let mut c = forward_coboundary(a, &s);
    if a.cover().charts().len() == 2 && r.gen_bool(0.5) {
        let v = &c.get(&["U", "V"]) + &laurent(r, "x", -3, 3);
        c = c.with(&["U", "V"], v);
    }
    c
}

/// `h_UV = ζ_UV·(σ¹_U·σ²_V∘f − σ²_U·σ¹_V∘f)`, whose coboundary is the
/// bracket of `δσ¹` and `δσ²`.
pub fn bracket_primitive(a: &Atlas, s1: &AtlasCochain, s2: &AtlasCochain) -> AtlasCochain {
    let mut h = AtlasCochain::new(2, 1);
    for (u, v) in a.cover().forward_pairs() {
        let (f, z) = model_base(u, v).unwrap();
        let b1 = rf_compose(&s1.get(&[v]), &f).unwrap();
        let b2 = rf_compose(&s2.get(&[v]), &f).unwrap();
        let val = &z * &(&(&s1.get(&[u]) * &b2) - &(&s2.get(&[u]) * &b1));
        h = h.with(&[u, v], val);
    }
    h
}

pub fn add(a: &AtlasCochain, b: &AtlasCochain) -> AtlasCochain {
    let mut out = a.clone();
    for (k, v) in &b.values {
        let cur = out.values.get(k).cloned().unwrap_or_else(RF::zero);
        out.values.insert(k.clone(), &cur + v);
    }
    out
}
