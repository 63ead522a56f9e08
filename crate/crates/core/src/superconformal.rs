//! Superconformality of transitions.
//!
//! Writing `ρ⁺ = λ(x,ξ) + F(x,ξ)θ` and `ρ⁻ = ζ(x,ξ)θ + ψ(x,ξ)`, a
//! morphism preserves the distribution spanned by `D = ∂/∂θ − θ∂/∂x` iff
//!
//! ```text
//! ζ² = ∂λ/∂x + (∂ψ/∂x)·ψ      and      F = ζ·ψ
//! ```
//!
//! as superfields in `ξ`. At order two the `ξ₁ξ₂` component of the first
//! relation reads `∂g¹²/∂x = 2ζζ¹² − ψ¹′ψ² + ψ¹ψ²′`.

use serde::Serialize;

use crate::atlas::Atlas;
use crate::diffpoly::Parity;
use crate::error::Result;
use crate::grassmann::{sf_multiply, Coefficient, OddMonomial, Superfield, Supermorphism};
use crate::report::{Entry, Report};
use crate::scalar::GaussianRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RelationTag {
    #[serde(rename = "zeta-squared")]
    ZetaSquared,
    #[serde(rename = "f-equals-zeta-psi")]
    FEqualsZetaPsi,
    #[serde(rename = "order2-g12")]
    Order2G12,
}

impl RelationTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationTag::ZetaSquared => "zeta-squared",
            RelationTag::FEqualsZetaPsi => "f-equals-zeta-psi",
            RelationTag::Order2G12 => "order2-g12",
        }
    }
}

/// Residual of one relation at one `ξ`-monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperconformalResidual<C> {
    pub tag: RelationTag,
    pub monomial: OddMonomial,
    pub residual: C,
    pub pass: bool,
}

/// The four `ξ`-superfields `(λ, F, ζ, ψ)` of a morphism.
pub struct Components<C: Coefficient> {
    pub lambda: Superfield<C>,
    pub f: Superfield<C>,
    pub zeta: Superfield<C>,
    pub psi: Superfield<C>,
}

pub fn components<C: Coefficient>(m: &Supermorphism<C>) -> Result<Components<C>> {
    let (ch, n) = (m.source(), m.order());
    let mut lambda = Superfield::zero(ch, n, Parity::Even);
    let mut f = Superfield::zero(ch, n, Parity::Odd);
    for (mon, c) in m.plus().coefficients() {
        if mon.has_theta() {
            f.set(mon.without_theta(), c.clone())?;
        } else {
            lambda.set(mon, c.clone())?;
        }
    }
    let mut zeta = Superfield::zero(ch, n, Parity::Even);
    let mut psi = Superfield::zero(ch, n, Parity::Odd);
    for (mon, c) in m.minus().coefficients() {
        if mon.has_theta() {
            zeta.set(mon.without_theta(), c.clone())?;
        } else {
            psi.set(mon, c.clone())?;
        }
    }
    Ok(Components { lambda, f, zeta, psi })
}

/// Per-monomial residuals of `λ′ + ψ′ψ − ζ²` and `F − ζψ`.
pub fn check_superconformal<C: Coefficient>(m: &Supermorphism<C>) -> Result<Vec<SuperconformalResidual<C>>> {
    let k = components(m)?;
    let even = k
        .lambda
        .derivative()
        .add(&sf_multiply(&k.psi.derivative(), &k.psi)?)?
        .sub(&sf_multiply(&k.zeta, &k.zeta)?)?;
    let odd = k.f.sub(&sf_multiply(&k.zeta, &k.psi)?)?;
    let mut out = Vec::new();
    for mon in all_monomials(m.order(), Parity::Even) {
        let tag = if mon.xi_degree() == 2 { RelationTag::Order2G12 } else { RelationTag::ZetaSquared };
        let r = even.get(mon);
        out.push(SuperconformalResidual { tag, monomial: mon, pass: r.is_zero(), residual: r });
    }
    for mon in all_monomials(m.order(), Parity::Odd) {
        let r = odd.get(mon);
        out.push(SuperconformalResidual {
            tag: RelationTag::FEqualsZetaPsi,
            monomial: mon,
            pass: r.is_zero(),
            residual: r,
        });
    }
    Ok(out)
}

/// All `ξ`-monomials (no `θ`) of the given parity in `n` generators.
pub fn all_monomials(n: usize, parity: Parity) -> Vec<OddMonomial> {
    (0u32..(1 << n))
        .map(|bits| {
            let idx: Vec<usize> = (0..n).filter(|b| bits & (1 << b) != 0).map(|b| b + 1).collect();
            OddMonomial::xis(&idx)
        })
        .filter(|m| m.parity() == parity)
        .collect()
}

pub fn is_superconformal<C: Coefficient>(m: &Supermorphism<C>) -> Result<bool> {
    Ok(check_superconformal(m)?.iter().all(|r| r.pass))
}

/// The order-2 relations written out coefficient by coefficient, for
/// cross-checking the general predicate: `[zeta-squared, f1, f2, order2-g12]`.
pub fn order2_relations<C: Coefficient>(m: &Supermorphism<C>) -> Result<[(RelationTag, C); 4]> {
    let d = m.order2_data()?;
    let two = C::from_scalar(GaussianRational::from_int(2));
    let zsq = d.f.derivative().sub(&d.zeta.mul(&d.zeta));
    let r1 = d.f1.sub(&d.zeta.mul(&d.psi1));
    let r2 = d.f2.sub(&d.zeta.mul(&d.psi2));
    let g = d
        .g12
        .derivative()
        .sub(&two.mul(&d.zeta).mul(&d.zeta12))
        .add(&d.psi1.derivative().mul(&d.psi2))
        .sub(&d.psi1.mul(&d.psi2.derivative()));
    Ok([
        (RelationTag::ZetaSquared, zsq),
        (RelationTag::FEqualsZetaPsi, r1),
        (RelationTag::FEqualsZetaPsi, r2),
        (RelationTag::Order2G12, g),
    ])
}

/// Runs [`check_superconformal`] on every stored transition.
pub fn check_atlas_superconformal(a: &Atlas) -> Result<Report> {
    let mut rep = Report::new("superconformal");
    for ((u, v), m) in a.transitions() {
        let loc = format!("{u}->{v}");
        for r in check_superconformal(m)? {
            rep.push(Entry::new(
                r.tag.as_str(),
                &loc,
                Some(r.monomial.render()),
                r.residual.render(),
                r.pass,
            ));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::Order2;
    use crate::scalar::RationalFunction as RF;

    fn x() -> RF {
        RF::var("x")
    }

    fn morphism(d: &Order2<RF>) -> Supermorphism<RF> {
        Supermorphism::order2(("U", "x"), ("V", "y"), d).unwrap()
    }

    #[test]
    fn identity_and_model_pass() {
        let id = Supermorphism::<RF>::identity("U", "x", 2).unwrap();
        assert!(is_superconformal(&id).unwrap());
        let model = morphism(&Order2::split(&RF::from_int(-1) / &x(), &RF::from_int(1) / &x()));
        assert!(is_superconformal(&model).unwrap());
    }

    #[test]
    fn order2_example_and_broken_zeta12() {
        let c = RF::from_int(3);
        let good = Order2 {
            f: x(),
            zeta: RF::one(),
            f1: c.clone(),
            f2: x(),
            g12: &c * &x(),
            psi1: c.clone(),
            psi2: x(),
            zeta12: RF::zero(),
        };
        assert!(is_superconformal(&morphism(&good)).unwrap());
        let bad = Order2 { zeta12: RF::one(), ..good };
        let res = check_superconformal(&morphism(&bad)).unwrap();
        let failing: Vec<_> = res.iter().filter(|r| !r.pass).collect();
        assert_eq!(failing.len(), 1);
        assert_eq!(failing[0].tag, RelationTag::Order2G12);
        assert_eq!(failing[0].residual, RF::from_int(-2));
        let rel = order2_relations(&morphism(&bad)).unwrap();
        assert_eq!(rel[3].1, RF::from_int(-2));
    }
}
