//! Kodaira–Spencer and obstruction extraction, atlas generators, and the
//! splitting solver and verifier for second-order odd deformations.

use std::collections::BTreeMap;

use crate::atlas::{
    alternate, atlas_coboundary, check_cochain_structure, check_cocycle, f_odd, g_even, model_base, psi,
    psi_cochain, Atlas, AtlasCochain, Cover, Transition,
};
use crate::cech::{solve_coboundary, to_leading, CechClassification, LineBundleModel};
use crate::error::{Error, ObstructionStage, Result};
use crate::grassmann::{morphism_compose, Order2, Superfield, Supermorphism};
use crate::report::{Entry, Report};
use crate::scalar::{rf_compose, RationalFunction as RF};
use crate::superconformal::is_superconformal;

type Pair = (String, String);

fn half() -> RF {
    RF::from_ratio(1, 2)
}

fn key(u: &str, v: &str) -> Vec<String> {
    vec![u.to_string(), v.to_string()]
}

fn ensure_superconformal(a: &Atlas) -> Result<()> {
    for ((u, v), t) in a.transitions() {
        if !is_superconformal(t)? {
            return Err(Error::NotSuperconformal(format!("{u}->{v}")));
        }
    }
    Ok(())
}

fn ensure_cocycle(c: &AtlasCochain, a: &Atlas, what: &str) -> Result<()> {
    let d = atlas_coboundary(a, c)?;
    if !d.is_zero() {
        return Err(Error::NotACocycle(format!("{what}: delta = {}", d.render())));
    }
    Ok(())
}

/// One KS component: the raw pair data and `κ^a = ψ^a + f^a/ζ`.
#[derive(Clone, Debug, PartialEq)]
pub struct KSComponent {
    pub f: BTreeMap<Pair, RF>,
    pub psi: AtlasCochain,
    pub kappa: AtlasCochain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KSClass {
    pub components: Vec<KSComponent>,
}

impl KSClass {
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.kappa.is_zero())
    }
}

/// Reads `(f^a_UV, ψ^a_UV)` off every pair and checks `f^a = ζψ^a` and the
/// cocycle property of `ψ^a`.
pub fn extract_ks(a: &Atlas) -> Result<KSClass> {
    ensure_superconformal(a)?;
    let mut components = Vec::new();
    for i in 1..=a.order() {
        let mut f = BTreeMap::new();
        let mut kappa = AtlasCochain::new(1, 1);
        for ((u, v), t) in a.transitions() {
            let (fi, pi) = (f_odd(t, i), psi(t, i));
            if fi != &t.zeta() * &pi {
                return Err(Error::NotSuperconformal(format!("{u}->{v}: f{i} != zeta*psi{i}")));
            }
            kappa.values.insert(key(u, v), &pi + &(&fi / &t.zeta()));
            f.insert((u.to_string(), v.to_string()), fi);
        }
        let p = psi_cochain(a, i);
        ensure_cocycle(&p, a, &format!("psi{i}"))?;
        components.push(KSComponent { f, psi: p, kappa });
    }
    Ok(KSClass { components })
}

/// `ω_UV = (f¹ξ₁θ + f²ξ₂θ + g¹²ξ₁ξ₂)∂/∂y`, split into its parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCocycle {
    /// `f^a` per pair.
    pub p_part: Vec<BTreeMap<Pair, RF>>,
    /// `f^a/ζ = ψ^a`, the same data in the `∂/∂η` frame (half of `κ^a`).
    pub p_normalized: Vec<AtlasCochain>,
    /// `g^{12}` as a weight-2 cochain.
    pub iota: AtlasCochain,
}

impl ObstructionCocycle {
    pub fn render_pair(&self, u: &str, v: &str) -> String {
        let k = (u.to_string(), v.to_string());
        let get = |m: &BTreeMap<Pair, RF>| m.get(&k).cloned().unwrap_or_else(RF::zero).render();
        let g = self.iota.get(&[u, v]).render();
        format!("({})*xi1*theta + ({})*xi2*theta + ({})*xi1*xi2", get(&self.p_part[0]), get(&self.p_part[1]), g)
    }

    pub fn is_zero(&self) -> bool {
        self.iota.is_zero() && self.p_normalized.iter().all(|c| c.is_zero())
    }
}

pub fn extract_obstruction(a: &Atlas) -> Result<ObstructionCocycle> {
    if a.order() != 2 {
        return Err(Error::UnsupportedOrder(a.order()));
    }
    let ks = extract_ks(a)?;
    let p_part = ks.components.iter().map(|c| c.f.clone()).collect();
    let p_normalized = ks.components.iter().map(|c| c.psi.clone()).collect();
    let mut iota = AtlasCochain::new(2, 1);
    for ((u, v), t) in a.transitions() {
        iota.values.insert(key(u, v), g_even(t, 1, 2));
    }
    Ok(ObstructionCocycle { p_part, p_normalized, iota })
}

fn check_spin(t: &Transition) -> Result<()> {
    let z = t.zeta();
    if &z * &z != t.body().derivative() {
        return Err(Error::SpinRelationViolated(format!("{}->{}", t.source(), t.target())));
    }
    Ok(())
}

/// Order-2 atlas on `base`'s split data with prescribed odd cochains `ψ¹, ψ²`
/// (weight 1) and even cochain `g¹²` (weight 2), all in the target frame.
/// `f^i = ζψ^i` and `ζ¹²` follow from superconformality.
pub fn build_from_cochains(base: &Atlas, psi1: &AtlasCochain, psi2: &AtlasCochain, g: &AtlasCochain) -> Result<Atlas> {
    let (p1, p2, g) = (alternate(base, psi1)?, alternate(base, psi2)?, alternate(base, g)?);
    ensure_cocycle(&p1, base, "psi1")?;
    ensure_cocycle(&p2, base, "psi2")?;
    let mut forward = Vec::new();
    for t in base.forward_transitions() {
        check_spin(&t)?;
        let (u, v) = (t.source(), t.target());
        let (f, z) = (t.body(), t.zeta());
        let (a1, a2, gg) = (p1.get(&[u, v]), p2.get(&[u, v]), g.get(&[u, v]));
        let w = &(&a1.derivative() * &a2) - &(&a1 * &a2.derivative());
        let z12 = &(&gg.derivative() + &w) / &(&RF::from_int(2) * &z);
        let d = Order2 {
            f1: &z * &a1,
            f2: &z * &a2,
            g12: gg,
            psi1: a1,
            psi2: a2,
            zeta12: z12,
            f,
            zeta: z,
        };
        forward.push(Supermorphism::order2((u, t.source_var()), (v, t.target_var()), &d)?);
    }
    let a = Atlas::new(base.cover().clone(), 2, forward, base.genus())?;
    let rep = check_cochain_structure(&a)?;
    if let Some(e) = rep.failures().find(|e| e.tag == "delta-g-bracket") {
        return Err(Error::BracketObstruction(format!("{}: {}", e.location, e.residual)));
    }
    Ok(a)
}

/// `ρ⁺ = f + ½ζΘ(ξ₁+ξ₂)θ`, `ρ⁻ = ζθ + ½Θ(ξ₁+ξ₂)`.
pub fn build_construction(base: &Atlas, theta: &AtlasCochain) -> Result<Atlas> {
    for t in base.forward_transitions() {
        check_spin(&t)?;
    }
    let mut half_theta = alternate(base, theta)?;
    for v in half_theta.values.values_mut() {
        *v = &half() * &*v;
    }
    build_from_cochains(base, &half_theta, &half_theta, &AtlasCochain::new(2, 1))
}

/// Adds `g¹²ξ₁ξ₂` to `ρ⁺` and `½ζ⁻¹(∂g¹²/∂x)ξ₁ξ₂θ` to `ρ⁻` on every pair.
pub fn twist_by_g12(a: &Atlas, g: &AtlasCochain) -> Result<Atlas> {
    if a.order() != 2 {
        return Err(Error::UnsupportedOrder(a.order()));
    }
    let g = alternate(a, g)?;
    let mut forward = Vec::new();
    for t in a.forward_transitions() {
        let (u, v) = (t.source(), t.target());
        let mut d = t.order2_data()?;
        let add = g.get(&[u, v]);
        d.zeta12 = &d.zeta12 + &(&(&half() * &add.derivative()) / &d.zeta);
        d.g12 = &d.g12 + &add;
        forward.push(Supermorphism::order2((u, t.source_var()), (v, t.target_var()), &d)?);
    }
    let out = a.with_forward(forward)?;
    let rep = check_cochain_structure(&out)?;
    if let Some(e) = rep.failures().find(|e| e.tag == "delta-g-bracket") {
        return Err(Error::BracketObstruction(format!("{}: {}", e.location, e.residual)));
    }
    Ok(out)
}

/// Per-chart components of `Λ_U`:
/// `Λ⁺ = x + λ^iξ_iθ + λ¹²ξ₁ξ₂`, `Λ⁻ = θ + φ^iξ_i + φ¹²ξ₁ξ₂θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSplitting {
    pub lambda1: RF,
    pub lambda2: RF,
    pub lambda12: RF,
    pub phi1: RF,
    pub phi2: RF,
    pub phi12: RF,
}

impl ChartSplitting {
    pub fn identity() -> Self {
        ChartSplitting {
            lambda1: RF::zero(),
            lambda2: RF::zero(),
            lambda12: RF::zero(),
            phi1: RF::zero(),
            phi2: RF::zero(),
            phi12: RF::zero(),
        }
    }

    pub fn morphism(&self, chart: &str, var: &str) -> Result<Transition> {
        let d = Order2 {
            f: RF::var(var),
            zeta: RF::one(),
            f1: self.lambda1.with_var(var),
            f2: self.lambda2.with_var(var),
            g12: self.lambda12.with_var(var),
            psi1: self.phi1.with_var(var),
            psi2: self.phi2.with_var(var),
            zeta12: self.phi12.with_var(var),
        };
        Supermorphism::order2((chart, var), (chart, var), &d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplittingMap {
    pub charts: BTreeMap<String, ChartSplitting>,
}

impl SplittingMap {
    pub fn identity(a: &Atlas) -> Self {
        SplittingMap {
            charts: a.cover().charts().iter().map(|c| (c.name.clone(), ChartSplitting::identity())).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.charts.values().all(|c| *c == ChartSplitting::identity())
    }
}

/// Bundle twists used by the splitting solve: `𝒯^{1/2}` and `𝒯` on the
/// sphere are `k = 1` and `k = 2`. Other values give a diagnostic run of the
/// same pipeline against a different line bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitOptions {
    pub half_twist: i64,
    pub tangent_twist: i64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { half_twist: 1, tangent_twist: 2 }
    }
}

fn model_bundle(a: &Atlas, k: i64) -> Result<LineBundleModel> {
    let c = a.cover();
    let b = if *c == Cover::two_chart() {
        LineBundleModel::new(k)
    } else if *c == Cover::three_chart() {
        LineBundleModel::three_chart(k)
    } else {
        return Err(Error::UnsupportedCover("charts must be U(x), V(y) and optionally W(z)".into()));
    };
    for t in a.forward_transitions() {
        let (f, z) = model_base(t.source(), t.target())?;
        if t.body() != f || t.zeta() != z {
            return Err(Error::UnsupportedCover(format!(
                "{}->{} has base ({}, {}), expected ({}, {})",
                t.source(),
                t.target(),
                t.body().render(),
                t.zeta().render(),
                f.render(),
                z.render()
            )));
        }
    }
    Ok(b)
}

fn forward_cochain(a: &Atlas, weight: i64, f: impl Fn(&Transition) -> Result<RF>) -> Result<AtlasCochain> {
    let mut c = AtlasCochain::new(weight, 1);
    for t in a.forward_transitions() {
        c.values.insert(key(t.source(), t.target()), f(&t)?);
    }
    Ok(c)
}

/// Classifications produced while solving for a splitting.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionClasses {
    pub linear: Vec<CechClassification>,
    pub quadratic: Option<CechClassification>,
}

fn solve_or_witness(
    a: &Atlas,
    opts: SplitOptions,
) -> Result<std::result::Result<(SplittingMap, ObstructionClasses), (ObstructionStage, CechClassification)>> {
    if a.order() != 2 {
        return Err(Error::UnsupportedOrder(a.order()));
    }
    ensure_superconformal(a)?;
    let bh = model_bundle(a, opts.half_twist)?;
    let bt = model_bundle(a, opts.tangent_twist)?;
    let mut linear = Vec::new();
    for i in 1..=2 {
        let c = forward_cochain(a, 1, |t| Ok(-&psi(t, i)))?;
        let cls = solve_coboundary(&to_leading(&c, bh)?, bh)?;
        if !cls.is_trivial() {
            return Ok(Err((ObstructionStage::Linear(i), cls)));
        }
        linear.push(cls);
    }
    let phi = |i: usize, chart: &str| linear[i - 1].trivializer.get(&[chart]);
    let g = forward_cochain(a, 2, |t| {
        let (u, v) = (t.source(), t.target());
        let f = t.body();
        let big1 = rf_compose(&phi(1, v), &f)?;
        let big2 = rf_compose(&phi(2, v), &f)?;
        let cross = &(&phi(2, u) * &big1) - &(&phi(1, u) * &big2);
        Ok(-&(&g_even(t, 1, 2) + &(&t.zeta() * &cross)))
    })?;
    let quad = solve_coboundary(&to_leading(&g, bt)?, bt)?;
    if !quad.is_trivial() {
        return Ok(Err((ObstructionStage::Quadratic, quad)));
    }
    let mut charts = BTreeMap::new();
    for ch in a.cover().charts() {
        let name = ch.name.as_str();
        let (p1, p2) = (phi(1, name), phi(2, name));
        let l12 = quad.trivializer.get(&[name]);
        let w = &(&p1.derivative() * &p2) - &(&p1 * &p2.derivative());
        let phi12 = &half() * &(&l12.derivative() + &w);
        charts.insert(
            name.to_string(),
            ChartSplitting {
                lambda1: p1.clone(),
                lambda2: p2.clone(),
                lambda12: l12,
                phi1: p1,
                phi2: p2,
                phi12,
            },
        );
    }
    Ok(Ok((SplittingMap { charts }, ObstructionClasses { linear, quadratic: Some(quad) })))
}

/// Solve the splitting equations on a model cover.
///
/// With `Φ = φ_V∘f` the equations are `ψ^i = ζφ^i_U − Φ^i` (weight 1) and
/// `λ¹²_V∘f − ζ²λ¹²_U = −(g¹² + ζ(φ²_UΦ¹ − φ¹_UΦ²))` (weight 2), closed by
/// `λ^i = φ^i` and `φ¹² = ½(λ¹²′ + φ¹′φ² − φ¹φ²′)`.
pub fn solve_splitting(a: &Atlas) -> Result<SplittingMap> {
    solve_splitting_with(a, SplitOptions::default())
}

pub fn solve_splitting_with(a: &Atlas, opts: SplitOptions) -> Result<SplittingMap> {
    match solve_or_witness(a, opts)? {
        Ok((s, _)) => Ok(s),
        Err((stage, witness)) => Err(Error::ObstructionNonzero { stage, witness: Box::new(witness) }),
    }
}

/// The classes met by the solver, without failing on a nontrivial one.
pub fn classify_obstruction(a: &Atlas, opts: SplitOptions) -> Result<ObstructionClasses> {
    Ok(match solve_or_witness(a, opts)? {
        Ok((_, c)) => c,
        Err((ObstructionStage::Quadratic, w)) => {
            let mut linear = Vec::new();
            let bh = model_bundle(a, opts.half_twist)?;
            for i in 1..=2 {
                let c = forward_cochain(a, 1, |t| Ok(-&psi(t, i)))?;
                linear.push(solve_coboundary(&to_leading(&c, bh)?, bh)?);
            }
            ObstructionClasses { linear, quadratic: Some(w) }
        }
        Err((ObstructionStage::Linear(i), w)) => {
            let bh = model_bundle(a, opts.half_twist)?;
            let mut linear = Vec::new();
            for j in 1..=2 {
                if j == i {
                    linear.push(w.clone());
                } else {
                    let c = forward_cochain(a, 1, |t| Ok(-&psi(t, j)))?;
                    linear.push(solve_coboundary(&to_leading(&c, bh)?, bh)?);
                }
            }
            ObstructionClasses { linear, quadratic: None }
        }
    })
}

/// Checks `Λ_V∘ρ_UV = ρ̂_UV∘Λ_U` on every ordered pair, `ρ̂` the split part.
pub fn verify_splitting(a: &Atlas, s: &SplittingMap) -> Result<Report> {
    let mut rep = Report::new("verify-splitting");
    let lam = |chart: &str| -> Result<Transition> {
        let cs = s
            .charts
            .get(chart)
            .ok_or_else(|| Error::ChartMismatch(format!("splitting map has no chart {chart}")))?;
        cs.morphism(chart, a.cover().var(chart)?)
    };
    for ((u, v), t) in a.transitions() {
        let hat = Supermorphism::split((u, t.source_var()), (v, t.target_var()), 2, t.body(), t.zeta())?;
        let lhs = morphism_compose(&lam(v)?, t)?;
        let rhs = morphism_compose(&hat, &lam(u)?)?;
        let loc = format!("{u}->{v}");
        push_diff(&mut rep, &loc, "plus", &lhs.plus().sub(rhs.plus())?);
        push_diff(&mut rep, &loc, "minus", &lhs.minus().sub(rhs.minus())?);
    }
    Ok(rep)
}

fn push_diff(rep: &mut Report, loc: &str, label: &str, d: &Superfield<RF>) {
    if d.is_zero() {
        rep.push(Entry::new("splitting", loc, Some(label.into()), "0".into(), true));
    }
    for (m, c) in d.coefficients() {
        rep.push(Entry::new("splitting", loc, Some(format!("{label}:{}", m.render())), c.render(), false));
    }
}

/// A warning when the genus-one exception may apply.
pub fn genus_warning(a: &Atlas) -> Option<String> {
    let constant_zeta = a.transitions().any(|(_, t)| t.zeta().is_constant());
    if a.genus() == Some(1) || constant_zeta {
        Some(
            "warning: the splitting criterion assumes genus != 1; this atlas is declared genus 1 or has constant \
             zeta transitions. Only the exactly verified results below are reported."
                .into(),
        )
    } else {
        None
    }
}

/// Full check suite on an atlas: cocycle, superconformality, intersections
/// and cochain identities.
pub fn check_all(a: &Atlas) -> Result<Report> {
    let mut rep = Report::new("check");
    rep.extend(check_cocycle(a)?);
    rep.extend(crate::superconformal::check_atlas_superconformal(a)?);
    rep.extend(crate::atlas::check_intersection_identities(a)?);
    rep.extend(check_cochain_structure(a)?);
    Ok(rep)
}
