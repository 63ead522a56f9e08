//! Covers, atlases of transitions, and the identities they must satisfy.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::grassmann::{morphism_compose, morphism_invert, OddMonomial, Superfield, Supermorphism};
use crate::report::{Entry, Report};
use crate::scalar::{rf_compose, RationalFunction as RF};

pub type Transition = Supermorphism<RF>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
    pub var: String,
}

/// Charts, declared pair overlaps (closed under reversal) and triple overlaps
/// (closed under permutation).
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    charts: Vec<Chart>,
    pairs: BTreeSet<(String, String)>,
    triples: BTreeSet<(String, String, String)>,
}

impl Cover {
    pub fn new(charts: &[(&str, &str)], pairs: &[(&str, &str)], triples: &[(&str, &str, &str)]) -> Result<Cover> {
        let mut cs: Vec<Chart> = Vec::new();
        for (n, v) in charts {
            if cs.iter().any(|c| c.name == *n || c.var == *v) {
                return Err(Error::ChartMismatch(format!("duplicate chart or variable: {n} {v}")));
            }
            cs.push(Chart { name: n.to_string(), var: v.to_string() });
        }
        let known = |n: &str| cs.iter().any(|c| c.name == n);
        let mut ps = BTreeSet::new();
        for (u, v) in pairs {
            if !known(u) || !known(v) || u == v {
                return Err(Error::ChartMismatch(format!("bad pair {u} {v}")));
            }
            ps.insert((u.to_string(), v.to_string()));
            ps.insert((v.to_string(), u.to_string()));
        }
        let mut ts = BTreeSet::new();
        for (u, v, w) in triples {
            let t = [*u, *v, *w];
            for i in 0..3 {
                for j in 0..3 {
                    if i != j && !ps.contains(&(t[i].to_string(), t[j].to_string())) {
                        return Err(Error::ChartMismatch(format!(
                            "triple {u} {v} {w} needs pair {} {}",
                            t[i], t[j]
                        )));
                    }
                }
            }
            for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
                ts.insert((t[a].to_string(), t[b].to_string(), t[c].to_string()));
            }
        }
        Ok(Cover { charts: cs, pairs: ps, triples: ts })
    }

    /// Two charts `U(x)`, `V(y)` covering the sphere.
    pub fn two_chart() -> Cover {
        Cover::new(&[("U", "x"), ("V", "y")], &[("U", "V")], &[]).expect("valid cover")
    }

    /// Three charts `U(x)`, `V(y)`, `W(z)` with one triple overlap.
    pub fn three_chart() -> Cover {
        Cover::new(
            &[("U", "x"), ("V", "y"), ("W", "z")],
            &[("U", "V"), ("U", "W"), ("V", "W")],
            &[("U", "V", "W")],
        )
        .expect("valid cover")
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn var(&self, chart: &str) -> Result<&str> {
        self.charts
            .iter()
            .find(|c| c.name == chart)
            .map(|c| c.var.as_str())
            .ok_or_else(|| Error::ChartMismatch(format!("unknown chart {chart}")))
    }

    fn index(&self, chart: &str) -> usize {
        self.charts.iter().position(|c| c.name == chart).unwrap_or(usize::MAX)
    }

    /// All ordered pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// Pairs with the source declared before the target.
    pub fn forward_pairs(&self) -> Vec<(&str, &str)> {
        self.pairs().filter(|(a, b)| self.index(a) < self.index(b)).collect()
    }

    /// All ordered triples.
    pub fn triples(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.triples.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str()))
    }

    /// Triples in declaration order (one per unordered triple).
    pub fn forward_triples(&self) -> Vec<(&str, &str, &str)> {
        self.triples()
            .filter(|(a, b, c)| self.index(a) < self.index(b) && self.index(b) < self.index(c))
            .collect()
    }

    pub fn has_pair(&self, u: &str, v: &str) -> bool {
        self.pairs.contains(&(u.to_string(), v.to_string()))
    }
}

/// Transitions for every ordered pair of a cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Atlas {
    cover: Cover,
    n: usize,
    transitions: BTreeMap<(String, String), Transition>,
    genus: Option<u32>,
}

impl Atlas {
    /// Missing reverse directions are derived by inversion.
    pub fn new(cover: Cover, n: usize, given: Vec<Transition>, genus: Option<u32>) -> Result<Atlas> {
        let mut transitions = BTreeMap::new();
        for t in given {
            let (u, v) = (t.source().to_string(), t.target().to_string());
            if !cover.has_pair(&u, &v) {
                return Err(Error::ChartMismatch(format!("transition {u}->{v} is not a declared pair")));
            }
            if cover.var(&u)? != t.source_var() || cover.var(&v)? != t.target_var() {
                return Err(Error::ChartMismatch(format!("transition {u}->{v} uses the wrong variables")));
            }
            if t.order() != n {
                return Err(Error::ChartMismatch(format!("transition {u}->{v} has order {}", t.order())));
            }
            if transitions.insert((u.clone(), v.clone()), t).is_some() {
                return Err(Error::ChartMismatch(format!("transition {u}->{v} given twice")));
            }
        }
        let missing: Vec<(String, String)> = cover
            .pairs()
            .filter(|(u, v)| !transitions.contains_key(&(u.to_string(), v.to_string())))
            .map(|(u, v)| (u.to_string(), v.to_string()))
            .collect();
        for (u, v) in missing {
            let back = transitions
                .get(&(v.clone(), u.clone()))
                .ok_or_else(|| Error::ChartMismatch(format!("no transition for {u}<->{v}")))?;
            let inv = morphism_invert(back, None)?;
            transitions.insert((u, v), inv);
        }
        Ok(Atlas { cover, n, transitions, genus })
    }

    /// The split atlas of the sphere on the two- or three-chart model cover.
    pub fn model(cover: Cover, n: usize) -> Result<Atlas> {
        let mut ts = Vec::new();
        for (u, v) in cover.forward_pairs() {
            let (f, z) = model_base(u, v)?;
            ts.push(Supermorphism::split((u, cover.var(u)?), (v, cover.var(v)?), n, f, z)?);
        }
        Atlas::new(cover, n, ts, Some(0))
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }
    pub fn order(&self) -> usize {
        self.n
    }
    pub fn genus(&self) -> Option<u32> {
        self.genus
    }
    pub fn set_genus(&mut self, g: Option<u32>) {
        self.genus = g;
    }

    pub fn transition(&self, u: &str, v: &str) -> Result<&Transition> {
        self.transitions
            .get(&(u.to_string(), v.to_string()))
            .ok_or_else(|| Error::ChartMismatch(format!("no transition {u}->{v}")))
    }

    pub fn transitions(&self) -> impl Iterator<Item = ((&str, &str), &Transition)> {
        self.transitions.iter().map(|((u, v), t)| ((u.as_str(), v.as_str()), t))
    }

    /// Replace transitions on forward pairs and re-derive their reverses.
    pub fn with_forward(&self, forward: Vec<Transition>) -> Result<Atlas> {
        Atlas::new(self.cover.clone(), self.n, forward, self.genus)
    }

    pub fn forward_transitions(&self) -> Vec<Transition> {
        self.cover
            .forward_pairs()
            .into_iter()
            .map(|(u, v)| self.transition(u, v).expect("complete atlas").clone())
            .collect()
    }
}

/// `(f, ζ)` of the model sphere cover, for pairs in declaration order.
pub fn model_base(u: &str, v: &str) -> Result<(RF, RF)> {
    let one = RF::one();
    let (x, y) = (RF::var("x"), RF::var("y"));
    Ok(match (u, v) {
        ("U", "V") => (-&one / &x, &one / &x),
        ("U", "W") => {
            let d = &x - &one;
            (-&one / &d, &one / &d)
        }
        ("V", "W") => {
            let d = &y + &one;
            (&y / &d, &one / &d)
        }
        _ => return Err(Error::UnsupportedCover(format!("no model transition {u}->{v}"))),
    })
}

fn sf_entries(rep: &mut Report, tag: &str, loc: &str, label: &str, diff: &Superfield<RF>) {
    if diff.is_zero() {
        rep.push(Entry::new(tag, loc, Some(label.to_string()), "0".into(), true));
        return;
    }
    for (m, c) in diff.coefficients() {
        rep.push(Entry::new(tag, loc, Some(format!("{label}:{}", m.render())), c.render(), false));
    }
}

fn rf_entry(tag: &str, loc: &str, mon: Option<String>, r: &RF) -> Entry {
    Entry::new(tag, loc, mon, r.render(), r.is_zero())
}

/// Pair inverses `ρ_VU∘ρ_UV = id` and triple cocycles `ρ_UW = ρ_VW∘ρ_UV`.
pub fn check_cocycle(a: &Atlas) -> Result<Report> {
    let mut rep = Report::new("cocycle");
    let n = a.order();
    for ((u, v), t) in a.transitions() {
        let back = a.transition(v, u)?;
        let comp = morphism_compose(back, t)?;
        let id = Supermorphism::<RF>::identity(u, t.source_var(), n)?;
        let loc = format!("{u}->{v}->{u}");
        sf_entries(&mut rep, "pair-inverse", &loc, "plus", &comp.plus().sub(id.plus())?);
        sf_entries(&mut rep, "pair-inverse", &loc, "minus", &comp.minus().sub(id.minus())?);
    }
    for (u, v, w) in a.cover().triples() {
        let comp = morphism_compose(a.transition(v, w)?, a.transition(u, v)?)?;
        let direct = a.transition(u, w)?;
        let loc = format!("{u}{v}{w}");
        sf_entries(&mut rep, "triple-cocycle", &loc, "plus", &direct.plus().sub(comp.plus())?);
        sf_entries(&mut rep, "triple-cocycle", &loc, "minus", &direct.minus().sub(comp.minus())?);
    }
    Ok(rep)
}

fn xi2(i: usize, j: usize) -> OddMonomial {
    OddMonomial::xis(&[i, j])
}

/// Odd data `ψ^i` of a transition.
pub fn psi(t: &Transition, i: usize) -> RF {
    t.minus().get(OddMonomial::xis(&[i]))
}

/// Odd data `f^i` (coefficient of `ξ_iθ` in `ρ⁺`).
pub fn f_odd(t: &Transition, i: usize) -> RF {
    t.plus().get(OddMonomial::xis(&[i]).with_theta())
}

/// Even data `g^{ij}` (coefficient of `ξ_iξ_j` in `ρ⁺`, `i < j`).
pub fn g_even(t: &Transition, i: usize, j: usize) -> RF {
    t.plus().get(xi2(i, j))
}

fn index_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

/// `W = ψ¹′ψ² − ψ¹ψ²′` of a transition, in its source variable.
pub fn psi_wronskian(t: &Transition) -> RF {
    let (p1, p2) = (psi(t, 1), psi(t, 2));
    &(&p1.derivative() * &p2) - &(&p1 * &p2.derivative())
}

/// Relations between the data of `ρ_UV` and `ρ_VU` on each overlap.
///
/// Always checked: `ψ_UV = −ζ·(ψ_VU∘f)` and `g_UV = −ζ²·(g_VU∘f)`. At order
/// two also `ζ¹²_UV = −ζ²ζ¹²_r − ζ′g_r + ζ³W_r` with `W_r` the Wronskian of
/// the reversed odd data, and the advisory identity `ψ¹′ψ² = ψ¹ψ²′`.
pub fn check_intersection_identities(a: &Atlas) -> Result<Report> {
    let mut rep = Report::new("intersections");
    let n = a.order();
    for ((u, v), t) in a.transitions() {
        let r = a.transition(v, u)?;
        let f = t.body();
        let z = t.zeta();
        let at = |c: &RF| rf_compose(c, &f);
        let loc = format!("{u}->{v}");
        for i in 1..=n {
            let res = &psi(t, i) + &(&z * &at(&psi(r, i))?);
            rep.push(rf_entry("psi-reversal", &loc, Some(format!("xi{i}")), &res));
        }
        for (i, j) in index_pairs(n) {
            let res = &g_even(t, i, j) + &(&(&z * &z) * &at(&g_even(r, i, j))?);
            rep.push(rf_entry("g-reversal", &loc, Some(format!("xi{i}*xi{j}")), &res));
        }
        if n == 2 {
            let zr = at(&r.minus().get(xi2(1, 2).with_theta()))?;
            let gr = at(&g_even(r, 1, 2))?;
            let wr = at(&psi_wronskian(r))?;
            let z2 = &z * &z;
            let expect = &(&(-&(&z2 * &zr)) - &(&z.derivative() * &gr)) + &(&(&z2 * &z) * &wr);
            let res = &t.minus().get(xi2(1, 2).with_theta()) - &expect;
            rep.push(rf_entry("zeta12-reversal", &loc, Some("xi1*xi2*theta".into()), &res));
            let w = psi_wronskian(t);
            rep.push(rf_entry("psi-wronskian", &loc, None, &w).advisory());
        }
    }
    if n != 2 {
        rep.note(format!("order {n}: zeta12 relations are checked at order 2 only"));
    }
    Ok(rep)
}

/// Bracket `[ψ^i, ψ^j]_UVW = ζ_VW(f_UV)·(ψ^i_UV·ψ^j_VW(f_UV) − ψ^j_UV·ψ^i_VW(f_UV))`.
pub fn bracket_psi(a: &Atlas, (u, v, w): (&str, &str, &str), i: usize, j: usize) -> Result<RF> {
    let uv = a.transition(u, v)?;
    let vw = a.transition(v, w)?;
    let f = uv.body();
    let zvw = rf_compose(&vw.zeta(), &f)?;
    let bi = rf_compose(&psi(vw, i), &f)?;
    let bj = rf_compose(&psi(vw, j), &f)?;
    Ok(&zvw * &(&(&psi(uv, i) * &bj) - &(&psi(uv, j) * &bi)))
}

/// Cochain identities on triples: `ψ^i` and `f^i` cocycles and `δg^{ij} = [ψ^i, ψ^j]`.
pub fn check_cochain_structure(a: &Atlas) -> Result<Report> {
    let mut rep = Report::new("cochains");
    let n = a.order();
    for (u, v, w) in a.cover().triples() {
        let (uv, vw, uw) = (a.transition(u, v)?, a.transition(v, w)?, a.transition(u, w)?);
        let f = uv.body();
        let zvw = rf_compose(&vw.zeta(), &f)?;
        let zuv = uv.zeta();
        let loc = format!("{u}{v}{w}");
        for i in 1..=n {
            let res = &psi(uw, i) - &(&(&zvw * &psi(uv, i)) + &rf_compose(&psi(vw, i), &f)?);
            rep.push(rf_entry("psi-cocycle", &loc, Some(format!("xi{i}")), &res));
            let fexp = &(&(&zvw * &zvw) * &f_odd(uv, i)) + &(&zuv * &rf_compose(&f_odd(vw, i), &f)?);
            let res = &f_odd(uw, i) - &fexp;
            rep.push(rf_entry("f-cocycle", &loc, Some(format!("xi{i}*theta")), &res));
        }
        for (i, j) in index_pairs(n) {
            let dg = &(&rf_compose(&g_even(vw, i, j), &f)? - &g_even(uw, i, j))
                + &(&(&zvw * &zvw) * &g_even(uv, i, j));
            let res = &dg - &bracket_psi(a, (u, v, w), i, j)?;
            rep.push(rf_entry("delta-g-bracket", &loc, Some(format!("xi{i}*xi{j}")), &res));
        }
    }
    Ok(rep)
}

/// A cochain on an atlas cover in the target-chart frame: component `UV`
/// lives in `U`'s variable and transforms like `ζ^k` times a section over `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtlasCochain {
    pub weight: i64,
    pub degree: usize,
    pub values: BTreeMap<Vec<String>, RF>,
}

impl AtlasCochain {
    pub fn new(weight: i64, degree: usize) -> Self {
        AtlasCochain { weight, degree, values: BTreeMap::new() }
    }

    pub fn with(mut self, key: &[&str], v: RF) -> Self {
        self.values.insert(key.iter().map(|s| s.to_string()).collect(), v);
        self
    }

    pub fn get(&self, key: &[&str]) -> RF {
        let k: Vec<String> = key.iter().map(|s| s.to_string()).collect();
        self.values.get(&k).cloned().unwrap_or_else(RF::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|v| v.is_zero())
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{}: {}", k.join(""), v.render())).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Fill in reverse pairs of a 1-cochain by `c_VU(f_UV) = −ζ_UV^{-k}·c_UV`.
pub fn alternate(a: &Atlas, c: &AtlasCochain) -> Result<AtlasCochain> {
    let mut out = c.clone();
    for (u, v) in a.cover().forward_pairs() {
        let key = vec![u.to_string(), v.to_string()];
        let rkey = vec![v.to_string(), u.to_string()];
        match (c.values.get(&key), c.values.get(&rkey)) {
            (Some(cuv), None) => {
                let t = a.transition(u, v)?;
                let pre = -&(&t.zeta().pow(-c.weight)? * cuv);
                out.values.insert(rkey, rf_compose(&pre, &a.transition(v, u)?.body())?);
            }
            (None, Some(cvu)) => {
                let t = a.transition(v, u)?;
                let pre = -&(&t.zeta().pow(-c.weight)? * cvu);
                out.values.insert(key, rf_compose(&pre, &a.transition(u, v)?.body())?);
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Čech coboundary in the target frame, on all ordered pairs or triples.
pub fn atlas_coboundary(a: &Atlas, c: &AtlasCochain) -> Result<AtlasCochain> {
    let k = c.weight;
    let mut out = AtlasCochain::new(k, c.degree + 1);
    match c.degree {
        0 => {
            for ((u, v), t) in a.transitions() {
                let val = &rf_compose(&c.get(&[v]), &t.body())? - &(&t.zeta().pow(k)? * &c.get(&[u]));
                out.values.insert(vec![u.into(), v.into()], val);
            }
        }
        1 => {
            let c = alternate(a, c)?;
            for (u, v, w) in a.cover().triples() {
                let uv = a.transition(u, v)?;
                let zvw = rf_compose(&a.transition(v, w)?.zeta(), &uv.body())?;
                let val = &(&rf_compose(&c.get(&[v, w]), &uv.body())? - &c.get(&[u, w]))
                    + &(&zvw.pow(k)? * &c.get(&[u, v]));
                out.values.insert(vec![u.into(), v.into(), w.into()], val);
            }
        }
        d => return Err(Error::DegreeOverflow(d)),
    }
    Ok(out)
}

/// `ψ^i` as a weight-1 cochain on all ordered pairs.
pub fn psi_cochain(a: &Atlas, i: usize) -> AtlasCochain {
    let mut c = AtlasCochain::new(1, 1);
    for ((u, v), t) in a.transitions() {
        c.values.insert(vec![u.into(), v.into()], psi(t, i));
    }
    c
}

/// `g^{ij}` as a weight-2 cochain on all ordered pairs.
pub fn g_cochain(a: &Atlas, i: usize, j: usize) -> AtlasCochain {
    let mut c = AtlasCochain::new(2, 1);
    for ((u, v), t) in a.transitions() {
        c.values.insert(vec![u.into(), v.into()], g_even(t, i, j));
    }
    c
}
