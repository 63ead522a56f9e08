//! Čech cochains for `𝒪(k)` on model covers of the sphere, with an exact
//! coboundary solver.
//!
//! Components are stored in the leading chart's frame: a 1-cochain on `AB`
//! is a function of `A`'s coordinate and
//!
//! ```text
//! (δσ)_AB  = ζ_AB^{-k}·σ_B(f_AB) − σ_A
//! (δc)_ABC = ζ_AB^{-k}·c_BC(f_AB) − c_AC + c_AB
//! ```
//!
//! On the two-chart cover `f_UV = −1/x`, `ζ_UV = 1/x`, so the `V`-part of a
//! coboundary is `x^k·σ_V(−1/x)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::atlas::{model_base, AtlasCochain, Cover};
use crate::error::{Error, Result};
use crate::scalar::{rf_compose, GaussianRational, Poly, RationalFunction as RF};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelCover {
    TwoChart,
    ThreeChart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LineBundleModel {
    pub k: i64,
    pub cover: ModelCover,
}

impl LineBundleModel {
    pub fn new(k: i64) -> Self {
        LineBundleModel { k, cover: ModelCover::TwoChart }
    }

    pub fn three_chart(k: i64) -> Self {
        LineBundleModel { k, cover: ModelCover::ThreeChart }
    }

    pub fn cover(&self) -> Cover {
        match self.cover {
            ModelCover::TwoChart => Cover::two_chart(),
            ModelCover::ThreeChart => Cover::three_chart(),
        }
    }

    /// Nerve simplices of the given degree, in declaration order.
    pub fn simplices(&self, degree: usize) -> Vec<Vec<String>> {
        let c = self.cover();
        let own = |v: Vec<&str>| v.into_iter().map(String::from).collect::<Vec<_>>();
        match degree {
            0 => c.charts().iter().map(|ch| vec![ch.name.clone()]).collect(),
            1 => c.forward_pairs().into_iter().map(|(a, b)| own(vec![a, b])).collect(),
            2 => c.forward_triples().into_iter().map(|(a, b, d)| own(vec![a, b, d])).collect(),
            _ => Vec::new(),
        }
    }
}

pub fn h1_dimension(k: i64) -> usize {
    (-k - 1).max(0) as usize
}

fn chart_var(chart: &str) -> Result<&'static str> {
    match chart {
        "U" => Ok("x"),
        "V" => Ok("y"),
        "W" => Ok("z"),
        _ => Err(Error::UnsupportedCover(format!("unknown model chart {chart}"))),
    }
}

/// Points of the leading chart excluded from a simplex's overlap.
fn excluded(simplex: &[String]) -> Vec<GaussianRational> {
    let one = GaussianRational::one();
    let has = |c: &str| simplex.iter().any(|s| s == c);
    match simplex[0].as_str() {
        "U" => {
            let mut v = Vec::new();
            if has("V") {
                v.push(GaussianRational::zero());
            }
            if has("W") {
                v.push(one);
            }
            v
        }
        "V" if has("W") => vec![-one],
        _ => Vec::new(),
    }
}

/// True if every root of the denominator lies in `allowed`.
fn poles_within(f: &RF, allowed: &[GaussianRational]) -> bool {
    let mut d = f.denom().clone();
    for r in allowed {
        let lin = Poly::new(vec![-r, GaussianRational::one()]);
        loop {
            let (q, rem) = d.div_rem(&lin);
            if !rem.is_zero() || d.is_constant() {
                break;
            }
            d = q;
        }
    }
    d.is_constant()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CechCochain {
    pub degree: usize,
    pub bundle: LineBundleModel,
    components: BTreeMap<Vec<String>, RF>,
}

impl CechCochain {
    pub fn zero(degree: usize, bundle: LineBundleModel) -> Self {
        CechCochain { degree, bundle, components: BTreeMap::new() }
    }

    /// Set a component after checking it lies in the simplex's ring.
    pub fn set(&mut self, simplex: &[&str], f: RF) -> Result<()> {
        let key: Vec<String> = simplex.iter().map(|s| s.to_string()).collect();
        if !self.bundle.simplices(self.degree).contains(&key) {
            return Err(Error::NotRepresentable(format!(
                "{} is not a degree-{} simplex of the cover",
                key.join(""),
                self.degree
            )));
        }
        let var = chart_var(simplex[0])?;
        if !f.is_constant() && f.variable() != var {
            return Err(Error::VariableMismatch { left: var.into(), right: f.variable().into() });
        }
        if !poles_within(&f, &excluded(&key)) {
            return Err(Error::NotRepresentable(format!("{} has poles inside {}", f.render(), key.join(""))));
        }
        if f.is_zero() {
            self.components.remove(&key);
        } else {
            self.components.insert(key, f.with_var(var));
        }
        Ok(())
    }

    pub fn with(mut self, simplex: &[&str], f: RF) -> Result<Self> {
        self.set(simplex, f)?;
        Ok(self)
    }

    pub fn get(&self, simplex: &[&str]) -> RF {
        let key: Vec<String> = simplex.iter().map(|s| s.to_string()).collect();
        let var = chart_var(simplex[0]).unwrap_or("x");
        self.components.get(&key).cloned().unwrap_or_else(|| RF::zero().with_var(var))
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<String>, &RF)> {
        self.components.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn sub(&self, o: &CechCochain) -> Result<CechCochain> {
        let mut out = self.clone();
        for (k, v) in &o.components {
            let keys: Vec<&str> = k.iter().map(|s| s.as_str()).collect();
            out.set(&keys, &self.get(&keys) - v)?;
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> =
            self.components.iter().map(|(k, v)| format!("{}: {}", k.join(""), v.render())).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

fn transport(a: &str, b: &str, k: i64, f: &RF) -> Result<RF> {
    let (fab, zab) = model_base(a, b)?;
    Ok(&zab.pow(-k)? * &rf_compose(f, &fab)?)
}

pub fn coboundary(c: &CechCochain) -> Result<CechCochain> {
    let k = c.bundle.k;
    let mut out = CechCochain::zero(c.degree + 1, c.bundle);
    match c.degree {
        0 => {
            for s in c.bundle.simplices(1) {
                let (a, b) = (s[0].as_str(), s[1].as_str());
                let v = &transport(a, b, k, &c.get(&[b]))? - &c.get(&[a]);
                out.set(&[a, b], v)?;
            }
        }
        1 => {
            for s in c.bundle.simplices(2) {
                let (a, b, d) = (s[0].as_str(), s[1].as_str(), s[2].as_str());
                let v = &(&transport(a, b, k, &c.get(&[b, d]))? - &c.get(&[a, d])) + &c.get(&[a, b]);
                out.set(&[a, b, d], v)?;
            }
        }
        d => return Err(Error::DegreeOverflow(d)),
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Trivial,
    Nontrivial,
}

/// Result of a coboundary solve. When nontrivial, `trivializer` splits `z`
/// minus the residual `Σ h1[j]·x^{-1-j}` on the `UV` face.
#[derive(Clone, Debug, PartialEq)]
pub struct CechClassification {
    pub verdict: Verdict,
    pub bundle: LineBundleModel,
    pub trivializer: CechCochain,
    pub h1: Vec<GaussianRational>,
}

impl CechClassification {
    pub fn is_trivial(&self) -> bool {
        self.verdict == Verdict::Trivial
    }

    /// The residual as a Laurent polynomial in `x`.
    pub fn residual(&self) -> RF {
        let terms: Vec<(i64, GaussianRational)> =
            self.h1.iter().enumerate().map(|(j, c)| (-1 - j as i64, c.clone())).collect();
        RF::from_laurent("x", &terms)
    }

    /// The residual as a 1-cochain on the two-chart cover.
    pub fn residual_cochain(&self) -> Result<CechCochain> {
        CechCochain::zero(1, LineBundleModel::new(self.bundle.k)).with(&["U", "V"], self.residual())
    }

    pub fn basis(&self) -> Vec<String> {
        (0..self.h1.len()).map(|j| format!("x^{}", -1 - j as i64)).collect()
    }

    pub fn render_witness(&self) -> String {
        match self.verdict {
            Verdict::Trivial => format!("trivial in H1(O({}))", self.bundle.k),
            Verdict::Nontrivial => {
                let coords: Vec<String> = self.h1.iter().map(|c| c.to_string()).collect();
                format!(
                    "{} in H1(O({})), coordinates [{}] on basis {{{}}}",
                    self.residual().render(),
                    self.bundle.k,
                    coords.join(", "),
                    self.basis().join(", ")
                )
            }
        }
    }
}

/// Solve `δσ = z` over Laurent coefficients. Non-negative powers go to
/// `σ_U`, powers `m ≤ min(k, −1)` to the transported `σ_V`, and the gap
/// `k < m < 0` is the `H¹` residual.
pub fn solve_coboundary(z: &CechCochain, b: LineBundleModel) -> Result<CechClassification> {
    if z.degree != 1 {
        return Err(Error::NotRepresentable(format!("expected a 1-cochain, got degree {}", z.degree)));
    }
    let k = b.k;
    let z = CechCochain { bundle: b, ..z.clone() };
    if b.cover == ModelCover::ThreeChart && !coboundary(&z)?.is_zero() {
        return Err(Error::NotACocycle(coboundary(&z)?.render()));
    }
    let uv = z.get(&["U", "V"]);
    let terms = uv
        .laurent_terms()
        .ok_or_else(|| Error::NotRepresentable(format!("{} is not a Laurent polynomial in x", uv.render())))?;
    let mut su = Vec::new();
    let mut sv = Vec::new();
    let mut h1 = vec![GaussianRational::zero(); h1_dimension(k)];
    for (m, c) in terms {
        if m >= 0 {
            su.push((m, -c));
        } else if m <= k {
            let j = k - m;
            let c = if j % 2 == 0 { c } else { -c };
            sv.push((j, c));
        } else {
            h1[(-1 - m) as usize] = c;
        }
    }
    let mut triv = CechCochain::zero(0, b);
    triv.set(&["U"], RF::from_laurent("x", &su))?;
    triv.set(&["V"], RF::from_laurent("y", &sv))?;
    let verdict = if h1.iter().all(|c| c.is_zero()) { Verdict::Trivial } else { Verdict::Nontrivial };
    if b.cover == ModelCover::ThreeChart && verdict == Verdict::Trivial {
        // σ_W(f_UW) = ζ_UW^k·(z_UW + σ_U), pulled back along x = (z−1)/z.
        let (_, zuw) = model_base("U", "W")?;
        let pre = &zuw.pow(k)? * &(&z.get(&["U", "W"]) + &triv.get(&["U"]));
        let back = &(&RF::var("z") - &RF::one()) / &RF::var("z");
        let sw = rf_compose(&pre, &back)?;
        if !sw.is_polynomial() {
            return Err(Error::NotRepresentable(format!("W section {} is not polynomial", sw.render())));
        }
        triv.set(&["W"], sw)?;
    }
    Ok(CechClassification { verdict, bundle: b, trivializer: triv, h1 })
}

/// Convert an atlas-frame cochain on a model cover to the leading frame:
/// `c_lead = ζ^{-w}·c_target` with the cochain's own weight `w`. The result
/// is attached to `bundle`, whose twist may differ from `w`.
pub fn to_leading(c: &AtlasCochain, bundle: LineBundleModel) -> Result<CechCochain> {
    let mut out = CechCochain::zero(c.degree, bundle);
    for s in bundle.simplices(c.degree) {
        let keys: Vec<&str> = s.iter().map(|x| x.as_str()).collect();
        let v = c.get(&keys);
        let v = match c.degree {
            0 => v,
            _ => &model_base(keys[0], keys[1])?.1.pow(-c.weight)? * &v,
        };
        out.set(&keys, v)?;
    }
    Ok(out)
}

/// Inverse of [`to_leading`] for twist `weight`.
pub fn to_target(c: &CechCochain, weight: i64) -> Result<AtlasCochain> {
    let mut out = AtlasCochain::new(weight, c.degree);
    for (s, v) in c.components() {
        let v = match c.degree {
            0 => v.clone(),
            _ => &model_base(&s[0], &s[1])?.1.pow(weight)? * v,
        };
        out.values.insert(s.clone(), v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RF {
        RF::var("x")
    }

    #[test]
    fn coboundary_example() {
        let s = CechCochain::zero(0, LineBundleModel::new(0)).with(&["U"], x()).unwrap();
        let d = coboundary(&s).unwrap();
        assert_eq!(d.get(&["U", "V"]), -&x());
        assert!(matches!(coboundary(&d).unwrap().degree, 2));
        let dd = CechCochain::zero(2, LineBundleModel::new(0));
        assert_eq!(coboundary(&dd), Err(Error::DegreeOverflow(2)));
    }

    #[test]
    fn solve_examples() {
        let z = CechCochain::zero(1, LineBundleModel::new(0)).with(&["U", "V"], RF::from_int(5)).unwrap();
        let c = solve_coboundary(&z, LineBundleModel::new(0)).unwrap();
        assert!(c.is_trivial());
        assert_eq!(c.trivializer.get(&["U"]), RF::from_int(-5));
        assert_eq!(coboundary(&c.trivializer).unwrap(), z);

        let b = LineBundleModel::new(-2);
        let z = CechCochain::zero(1, b).with(&["U", "V"], RF::monomial("x", GaussianRational::one(), -1)).unwrap();
        let c = solve_coboundary(&z, b).unwrap();
        assert_eq!(c.verdict, Verdict::Nontrivial);
        assert_eq!(c.h1, vec![GaussianRational::one()]);
    }

    #[test]
    fn dimensions() {
        assert_eq!(h1_dimension(0), 0);
        assert_eq!(h1_dimension(-2), 1);
        assert_eq!(h1_dimension(-6), 5);
    }

    #[test]
    fn ring_membership_enforced() {
        let b = LineBundleModel::new(1);
        let bad = &RF::one() / &(&x() - &RF::one());
        assert!(CechCochain::zero(1, b).with(&["U", "V"], bad).is_err());
        assert!(CechCochain::zero(0, b).with(&["U"], RF::monomial("x", GaussianRational::one(), -1)).is_err());
    }
}
