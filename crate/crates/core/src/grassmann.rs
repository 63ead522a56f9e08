//! Superfields in the odd generators `ξ₁ < … < ξₙ < θ` and the
//! supermorphisms built from them.

use std::collections::BTreeMap;
use std::fmt;

use crate::diffpoly::{DiffPolynomial, Parity};
use crate::error::{Error, Result};
use crate::scalar::{rf_compose, rf_sum, GaussianRational, Mobius, RationalFunction};

/// Coefficient ring of a superfield: even functions of one chart coordinate.
pub trait Coefficient: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn from_scalar(c: GaussianRational) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Derivative in the coefficient's own coordinate.
    fn derivative(&self) -> Self;
    /// Evaluate at the body map `body` of an inner morphism.
    fn compose(&self, body: &Self) -> Result<Self>;
    fn render(&self) -> String;

    fn one() -> Self {
        Self::from_scalar(GaussianRational::one())
    }

    fn sum(items: Vec<Self>) -> Self {
        items.iter().fold(Self::zero(), |acc, c| acc.add(c))
    }

    fn inv(&self) -> Result<Self> {
        Err(Error::DivisionByZero)
    }

    /// The coordinate function `var` itself, if representable.
    fn coordinate(_var: &str) -> Option<Self> {
        None
    }

    /// Rational inverse of a body map, written in coordinate `var`.
    fn body_inverse(&self, _var: &str) -> Option<Self> {
        None
    }
}

impl Coefficient for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn from_scalar(c: GaussianRational) -> Self {
        RationalFunction::constant(c)
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sum(items: Vec<Self>) -> Self {
        rf_sum(&items)
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn derivative(&self) -> Self {
        RationalFunction::derivative(self)
    }
    fn compose(&self, body: &Self) -> Result<Self> {
        rf_compose(self, body)
    }
    fn render(&self) -> String {
        RationalFunction::render(self)
    }
    fn inv(&self) -> Result<Self> {
        RationalFunction::inv(self)
    }
    fn coordinate(var: &str) -> Option<Self> {
        Some(RationalFunction::var(var))
    }
    fn body_inverse(&self, var: &str) -> Option<Self> {
        Mobius::detect(self).map(|m| m.inverse(var))
    }
}

/// Formal backend: symbols of the outer morphism are read as already
/// evaluated at the inner body map, so composition is the identity and the
/// Taylor derivatives are formal derivatives in the outer coordinate.
impl Coefficient for DiffPolynomial {
    fn zero() -> Self {
        DiffPolynomial::zero()
    }
    fn from_scalar(c: GaussianRational) -> Self {
        DiffPolynomial::constant(c)
    }
    fn is_zero(&self) -> bool {
        DiffPolynomial::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn derivative(&self) -> Self {
        self.derive()
    }
    fn compose(&self, _body: &Self) -> Result<Self> {
        Ok(self.clone())
    }
    fn render(&self) -> String {
        DiffPolynomial::render(self)
    }
    fn inv(&self) -> Result<Self> {
        match self.as_constant() {
            Some(c) if !c.is_zero() => Ok(DiffPolynomial::constant(c.inv())),
            _ => Err(Error::DivisionByZero),
        }
    }
}

/// Highest bit, so that `θ` sorts after every `ξᵢ`.
const THETA: u32 = 1 << 31;
const MAX_XI: usize = 30;

/// A product of distinct odd generators in canonical order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OddMonomial(u32);

impl OddMonomial {
    pub const ONE: OddMonomial = OddMonomial(0);
    pub const THETA: OddMonomial = OddMonomial(THETA);

    /// `ξ_{i₁}⋯ξ_{i_k}` for 1-based distinct indices in any order; the sign
    /// of the sorting permutation is returned alongside.
    pub fn xi(indices: &[usize]) -> (OddMonomial, bool) {
        let mut acc = OddMonomial::ONE;
        let mut negative = false;
        for &i in indices {
            assert!((1..=MAX_XI).contains(&i), "xi index out of range");
            match acc.mul(OddMonomial(1 << (i - 1))) {
                Some((m, neg)) => {
                    acc = m;
                    negative ^= neg;
                }
                None => panic!("repeated generator xi{i}"),
            }
        }
        (acc, negative)
    }

    /// `ξ_{i₁}⋯ξ_{i_k}` for strictly increasing indices.
    pub fn xis(indices: &[usize]) -> OddMonomial {
        let (m, neg) = OddMonomial::xi(indices);
        assert!(!neg, "indices must be increasing");
        m
    }

    pub fn with_theta(self) -> OddMonomial {
        OddMonomial(self.0 | THETA)
    }

    pub fn without_theta(self) -> OddMonomial {
        OddMonomial(self.0 & !THETA)
    }

    pub fn has_theta(self) -> bool {
        self.0 & THETA != 0
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Number of `ξ` generators.
    pub fn xi_degree(self) -> u32 {
        (self.0 & !THETA).count_ones()
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn parity(self) -> Parity {
        Parity::from_count(self.degree() as usize)
    }

    pub fn xi_indices(self) -> Vec<usize> {
        (0..MAX_XI).filter(|b| self.0 & (1 << b) != 0).map(|b| b + 1).collect()
    }

    fn max_xi(self) -> usize {
        self.xi_indices().last().copied().unwrap_or(0)
    }

    /// `self·o = ±m`, `None` if a generator repeats.
    pub fn mul(self, o: OddMonomial) -> Option<(OddMonomial, bool)> {
        if self.0 & o.0 != 0 {
            return None;
        }
        let mut swaps = 0;
        let mut rest = o.0;
        while rest != 0 {
            let j = rest.trailing_zeros();
            rest &= rest - 1;
            let above = if j == 31 { 0 } else { self.0 >> (j + 1) };
            swaps += above.count_ones();
        }
        Some((OddMonomial(self.0 | o.0), swaps % 2 == 1))
    }

    pub fn render(self) -> String {
        let mut parts: Vec<String> = self.xi_indices().iter().map(|i| format!("xi{i}")).collect();
        if self.has_theta() {
            parts.push("theta".to_string());
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Debug for OddMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// `Σ c_m(x)·m` over odd monomials `m`, all of one declared parity.
#[derive(Clone)]
pub struct Superfield<C: Coefficient> {
    chart: String,
    n: usize,
    parity: Parity,
    coeffs: BTreeMap<OddMonomial, C>,
}

impl<C: Coefficient> Superfield<C> {
    pub fn zero(chart: &str, n: usize, parity: Parity) -> Self {
        assert!(n <= MAX_XI, "too many odd parameters");
        Superfield { chart: chart.to_string(), n, parity, coeffs: BTreeMap::new() }
    }

    pub fn monomial(chart: &str, n: usize, m: OddMonomial, c: C) -> Result<Self> {
        let mut s = Superfield::zero(chart, n, m.parity());
        s.set(m, c)?;
        Ok(s)
    }

    /// The even superfield with only a body component.
    pub fn scalar(chart: &str, n: usize, c: C) -> Self {
        let mut s = Superfield::zero(chart, n, Parity::Even);
        if !c.is_zero() {
            s.coeffs.insert(OddMonomial::ONE, c);
        }
        s
    }

    pub fn chart(&self) -> &str {
        &self.chart
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn get(&self, m: OddMonomial) -> C {
        self.coeffs.get(&m).cloned().unwrap_or_else(C::zero)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (OddMonomial, &C)> {
        self.coeffs.iter().map(|(m, c)| (*m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Replace the coefficient of `m`, enforcing parity and generator range.
    pub fn set(&mut self, m: OddMonomial, c: C) -> Result<()> {
        if m.parity() != self.parity {
            return Err(Error::ParityMismatch(format!(
                "monomial {} in a superfield of parity {:?}",
                m.render(),
                self.parity
            )));
        }
        if m.max_xi() > self.n {
            return Err(Error::ChartMismatch(format!(
                "monomial {} exceeds order {}",
                m.render(),
                self.n
            )));
        }
        if c.is_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, c);
        }
        Ok(())
    }

    fn accumulate(&mut self, m: OddMonomial, c: C) {
        let next = match self.coeffs.get(&m) {
            Some(old) => old.add(&c),
            None => c,
        };
        if next.is_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, next);
        }
    }

    fn compatible(&self, o: &Self) -> Result<()> {
        if self.chart != o.chart || self.n != o.n {
            return Err(Error::ChartMismatch(format!(
                "superfields over {}/{} and {}/{}",
                self.chart, self.n, o.chart, o.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.compatible(o)?;
        if self.parity != o.parity && !self.is_zero() && !o.is_zero() {
            return Err(Error::ParityMismatch("sum of even and odd superfields".into()));
        }
        let mut out = self.clone();
        if self.is_zero() {
            out.parity = o.parity;
        }
        for (m, c) in &o.coeffs {
            out.accumulate(*m, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Superfield {
            coeffs: self.coeffs.iter().map(|(m, c)| (*m, c.neg())).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Superfield::zero(&self.chart, self.n, self.parity);
        for (m, a) in &self.coeffs {
            out.accumulate(*m, a.mul(c));
        }
        out
    }

    /// Coefficientwise derivative in the chart coordinate.
    pub fn derivative(&self) -> Self {
        let mut out = Superfield::zero(&self.chart, self.n, self.parity);
        for (m, a) in &self.coeffs {
            out.accumulate(*m, a.derivative());
        }
        out
    }

    /// The component of ξ-degree `d`.
    pub fn xi_degree_part(&self, d: u32) -> Self {
        Superfield {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| m.xi_degree() == d)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
            ..self.clone()
        }
    }

    /// Lowest ξ-degree carrying a nonzero coefficient.
    pub fn min_xi_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|m| m.xi_degree()).min()
    }

    pub fn render(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        self.coeffs
            .iter()
            .map(|(m, c)| {
                if *m == OddMonomial::ONE {
                    format!("({})", c.render())
                } else {
                    format!("({})*{}", c.render(), m.render())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl<C: Coefficient> PartialEq for Superfield<C> {
    fn eq(&self, o: &Self) -> bool {
        self.chart == o.chart
            && self.n == o.n
            && self.coeffs == o.coeffs
            && (self.parity == o.parity || self.coeffs.is_empty())
    }
}

impl<C: Coefficient> fmt::Debug for Superfield<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.chart, self.render())
    }
}

/// Graded product with Koszul signs.
pub fn sf_multiply<C: Coefficient>(a: &Superfield<C>, b: &Superfield<C>) -> Result<Superfield<C>> {
    a.compatible(b)?;
    let parity = if a.parity == b.parity { Parity::Even } else { Parity::Odd };
    let mut terms: BTreeMap<OddMonomial, Vec<C>> = BTreeMap::new();
    for (ma, ca) in &a.coeffs {
        for (mb, cb) in &b.coeffs {
            if let Some((m, neg)) = ma.mul(*mb) {
                let c = ca.mul(cb);
                terms.entry(m).or_default().push(if neg { c.neg() } else { c });
            }
        }
    }
    let mut out = Superfield::zero(&a.chart, a.n, parity);
    for (m, cs) in terms {
        let c = C::sum(cs);
        if !c.is_zero() {
            out.coeffs.insert(m, c);
        }
    }
    Ok(out)
}

/// Taylor expansion `Σ_k c^{(k)}(base)·shift^k/k!` for a nilpotent even shift.
pub fn sf_substitute_even<C: Coefficient>(
    c: &C,
    shift: &Superfield<C>,
    base: &C,
) -> Result<Superfield<C>> {
    if shift.parity != Parity::Even && !shift.is_zero() {
        return Err(Error::ParityMismatch("Taylor shift must be even".into()));
    }
    if shift.coeffs.contains_key(&OddMonomial::ONE) {
        return Err(Error::NonNilpotentShift);
    }
    let mut out = Superfield::scalar(&shift.chart, shift.n, c.compose(base)?);
    let mut power = Superfield::scalar(&shift.chart, shift.n, C::one());
    let mut deriv = c.clone();
    let mut factorial = GaussianRational::one();
    for k in 1.. {
        power = sf_multiply(&power, shift)?;
        if power.is_zero() {
            break;
        }
        deriv = deriv.derivative();
        if deriv.is_zero() {
            break;
        }
        factorial = &factorial * &GaussianRational::from_int(k);
        let coef = deriv.compose(base)?.mul(&C::from_scalar(factorial.inv()));
        out = out.add(&power.scale(&coef))?;
    }
    Ok(out)
}

/// A chart transition `(x, θ) ↦ (ρ⁺, ρ⁻)` from `source` to `target`.
#[derive(Clone, PartialEq)]
pub struct Supermorphism<C: Coefficient> {
    source: String,
    target: String,
    source_var: String,
    target_var: String,
    n: usize,
    plus: Superfield<C>,
    minus: Superfield<C>,
}

impl<C: Coefficient> Supermorphism<C> {
    /// Checks shapes: `plus` even, `minus` odd, both over `source`, and a
    /// nonvanishing `θ` coefficient `ζ` in `minus`.
    pub fn new(
        (source, source_var): (&str, &str),
        (target, target_var): (&str, &str),
        plus: Superfield<C>,
        minus: Superfield<C>,
    ) -> Result<Self> {
        if plus.chart != source || minus.chart != source {
            return Err(Error::ChartMismatch(format!(
                "components of {source}->{target} must live over {source}"
            )));
        }
        if plus.n != minus.n {
            return Err(Error::ChartMismatch("components disagree on order".into()));
        }
        if (plus.parity != Parity::Even && !plus.is_zero()) || (minus.parity != Parity::Odd && !minus.is_zero()) {
            return Err(Error::ParityMismatch(format!("{source}->{target}: rho+ even, rho- odd")));
        }
        let plus = Superfield { parity: Parity::Even, ..plus };
        let minus = Superfield { parity: Parity::Odd, ..minus };
        if minus.get(OddMonomial::THETA).is_zero() {
            return Err(Error::VanishingZeta(format!("{source}->{target}")));
        }
        Ok(Supermorphism {
            source: source.to_string(),
            target: target.to_string(),
            source_var: source_var.to_string(),
            target_var: target_var.to_string(),
            n: plus.n,
            plus,
            minus,
        })
    }

    pub fn identity(chart: &str, var: &str, n: usize) -> Result<Self> {
        let x = C::coordinate(var)
            .ok_or_else(|| Error::ChartMismatch("coefficient ring has no coordinate".into()))?;
        Supermorphism::new(
            (chart, var),
            (chart, var),
            Superfield::scalar(chart, n, x),
            Superfield::monomial(chart, n, OddMonomial::THETA, C::one())?,
        )
    }

    /// Split morphism `(f, ζθ)`.
    pub fn split(source: (&str, &str), target: (&str, &str), n: usize, f: C, zeta: C) -> Result<Self> {
        Supermorphism::new(
            source,
            target,
            Superfield::scalar(source.0, n, f),
            Superfield::monomial(source.0, n, OddMonomial::THETA, zeta)?,
        )
    }

    pub fn source(&self) -> &str {
        &self.source
    }
    pub fn target(&self) -> &str {
        &self.target
    }
    pub fn source_var(&self) -> &str {
        &self.source_var
    }
    pub fn target_var(&self) -> &str {
        &self.target_var
    }
    pub fn order(&self) -> usize {
        self.n
    }
    pub fn plus(&self) -> &Superfield<C> {
        &self.plus
    }
    pub fn minus(&self) -> &Superfield<C> {
        &self.minus
    }
    pub fn body(&self) -> C {
        self.plus.get(OddMonomial::ONE)
    }
    pub fn zeta(&self) -> C {
        self.minus.get(OddMonomial::THETA)
    }

    /// Build an order-2 morphism from its eight coefficient functions.
    pub fn order2(source: (&str, &str), target: (&str, &str), d: &Order2<C>) -> Result<Self> {
        let ch = source.0;
        let mut plus = Superfield::zero(ch, 2, Parity::Even);
        plus.set(OddMonomial::ONE, d.f.clone())?;
        plus.set(OddMonomial::xis(&[1]).with_theta(), d.f1.clone())?;
        plus.set(OddMonomial::xis(&[2]).with_theta(), d.f2.clone())?;
        plus.set(OddMonomial::xis(&[1, 2]), d.g12.clone())?;
        let mut minus = Superfield::zero(ch, 2, Parity::Odd);
        minus.set(OddMonomial::THETA, d.zeta.clone())?;
        minus.set(OddMonomial::xis(&[1]), d.psi1.clone())?;
        minus.set(OddMonomial::xis(&[2]), d.psi2.clone())?;
        minus.set(OddMonomial::xis(&[1, 2]).with_theta(), d.zeta12.clone())?;
        Supermorphism::new(source, target, plus, minus)
    }

    /// Coefficients of an order-2 morphism.
    pub fn order2_data(&self) -> Result<Order2<C>> {
        if self.n != 2 {
            return Err(Error::UnsupportedOrder(self.n));
        }
        Ok(Order2 {
            f: self.body(),
            zeta: self.zeta(),
            f1: self.plus.get(OddMonomial::xis(&[1]).with_theta()),
            f2: self.plus.get(OddMonomial::xis(&[2]).with_theta()),
            g12: self.plus.get(OddMonomial::xis(&[1, 2])),
            psi1: self.minus.get(OddMonomial::xis(&[1])),
            psi2: self.minus.get(OddMonomial::xis(&[2])),
            zeta12: self.minus.get(OddMonomial::xis(&[1, 2]).with_theta()),
        })
    }

    /// True if only the body and `ζθ` are present.
    pub fn is_split(&self) -> bool {
        self.plus.coefficients().all(|(m, _)| m == OddMonomial::ONE)
            && self.minus.coefficients().all(|(m, _)| m == OddMonomial::THETA)
    }
}

impl<C: Coefficient> fmt::Debug for Supermorphism<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}->{}: rho+ = {}; rho- = {}",
            self.source,
            self.target,
            self.plus.render(),
            self.minus.render()
        )
    }
}

/// The coefficient functions of an order-2 transition:
/// `ρ⁺ = f + f¹ξ₁θ + f²ξ₂θ + g¹²ξ₁ξ₂`, `ρ⁻ = ζθ + ψ¹ξ₁ + ψ²ξ₂ + ζ¹²ξ₁ξ₂θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Order2<C> {
    pub f: C,
    pub zeta: C,
    pub f1: C,
    pub f2: C,
    pub g12: C,
    pub psi1: C,
    pub psi2: C,
    pub zeta12: C,
}

impl<C: Coefficient> Order2<C> {
    pub fn split(f: C, zeta: C) -> Self {
        Order2 {
            f,
            zeta,
            f1: C::zero(),
            f2: C::zero(),
            g12: C::zero(),
            psi1: C::zero(),
            psi2: C::zero(),
            zeta12: C::zero(),
        }
    }
}

/// Image of an outer superfield `s(y, η)` under the substitution
/// `y = ρ⁺`, `η = ρ⁻` of `inner`.
fn substitute<C: Coefficient>(s: &Superfield<C>, inner: &Supermorphism<C>) -> Result<Superfield<C>> {
    let ch = &inner.source;
    let n = inner.n;
    let body = inner.body();
    let mut shift = inner.plus.clone();
    shift.coeffs.remove(&OddMonomial::ONE);
    let mut out = Superfield::zero(ch, n, s.parity);
    for (m, c) in &s.coeffs {
        let coef = sf_substitute_even(c, &shift, &body)?;
        let xi = Superfield::monomial(ch, n, m.without_theta(), C::one())?;
        let mut term = sf_multiply(&coef, &xi)?;
        if m.has_theta() {
            term = sf_multiply(&term, &inner.minus)?;
        }
        out = out.add(&term)?;
    }
    Ok(Superfield { parity: s.parity, ..out })
}

/// `second ∘ first`.
pub fn morphism_compose<C: Coefficient>(
    second: &Supermorphism<C>,
    first: &Supermorphism<C>,
) -> Result<Supermorphism<C>> {
    if first.target != second.source {
        return Err(Error::ChartMismatch(format!(
            "cannot compose {}->{} after {}->{}",
            second.source, second.target, first.source, first.target
        )));
    }
    if first.n != second.n {
        return Err(Error::ChartMismatch("morphisms disagree on order".into()));
    }
    Supermorphism::new(
        (&first.source, &first.source_var),
        (&second.target, &second.target_var),
        substitute(&second.plus, first)?,
        substitute(&second.minus, first)?,
    )
}

/// Inverse morphism, built order by order in ξ-degree starting from the
/// inverse of the split part. `body_inverse` overrides Möbius detection.
pub fn morphism_invert<C: Coefficient>(
    m: &Supermorphism<C>,
    body_inverse: Option<C>,
) -> Result<Supermorphism<C>> {
    let (tgt, tvar) = (m.target.as_str(), m.target_var.as_str());
    let n = m.n;
    let g = match body_inverse {
        Some(g) => g,
        None => m.body().body_inverse(tvar).ok_or_else(|| {
            Error::NonInvertibleBody(format!("{}->{}: {}", m.source, m.target, m.body().render()))
        })?,
    };
    let x = C::coordinate(&m.source_var)
        .ok_or_else(|| Error::NonInvertibleBody("coefficient ring has no coordinate".into()))?;
    if m.body().compose(&g)? != C::coordinate(tvar).expect("coordinate exists") {
        return Err(Error::NonInvertibleBody(format!("supplied inverse of {} is wrong", m.body().render())));
    }
    let zeta_inv = m.zeta().compose(&g)?.inv().map_err(|_| Error::VanishingZeta(m.target.clone()))?;
    let back = (tgt, tvar);
    let fwd = (m.source.as_str(), m.source_var.as_str());
    let mut p = Supermorphism::split(back, fwd, n, g.clone(), zeta_inv.clone())?;
    let id_plus = Superfield::scalar(&m.source, n, x);
    let id_minus = Superfield::monomial(&m.source, n, OddMonomial::THETA, C::one())?;

    // Pull a superfield in (x, θ) back along the split inverse (w ↦ g(w), η ↦ ζ⁻¹η).
    let pull = |e: &Superfield<C>| -> Result<Superfield<C>> {
        let mut out = Superfield::zero(tgt, n, e.parity);
        for (mon, c) in &e.coeffs {
            let mut v = c.compose(&g)?;
            if mon.has_theta() {
                v = v.mul(&zeta_inv);
            }
            out.accumulate(*mon, v);
        }
        Ok(out)
    };

    for _ in 0..=n {
        let comp = morphism_compose(&p, m)?;
        let ep = comp.plus.sub(&id_plus)?;
        let em = comp.minus.sub(&id_minus)?;
        let d = match (ep.min_xi_degree(), em.min_xi_degree()) {
            (None, None) => return Ok(p),
            (a, b) => a.into_iter().chain(b).min().expect("some degree"),
        };
        let plus = p.plus.sub(&pull(&ep.xi_degree_part(d))?)?;
        let minus = p.minus.sub(&pull(&em.xi_degree_part(d))?)?;
        p = Supermorphism::new(back, fwd, plus, minus)?;
    }
    Err(Error::NonInvertibleBody(format!("{}->{}: inversion did not converge", m.source, m.target)))
}

#[cfg(test)]
mod tests {
    use super::*;

    type RF = RationalFunction;

    fn x() -> RF {
        RF::var("x")
    }
    fn c(n: i64) -> RF {
        RF::from_int(n)
    }
    fn mono(idx: &[usize], theta: bool) -> OddMonomial {
        let m = OddMonomial::xis(idx);
        if theta {
            m.with_theta()
        } else {
            m
        }
    }
    fn sf(n: usize, terms: &[(OddMonomial, RF)]) -> Superfield<RF> {
        let mut s = Superfield::zero("U", n, terms[0].0.parity());
        for (m, v) in terms {
            s.set(*m, v.clone()).unwrap();
        }
        s
    }

    #[test]
    fn multiply_examples() {
        let a = sf(2, &[(mono(&[1], true), c(1))]);
        let b = sf(2, &[(mono(&[2], false), c(1))]);
        let p = sf_multiply(&a, &b).unwrap();
        assert_eq!(p.get(mono(&[1, 2], true)), c(-1));
        let t = sf(2, &[(OddMonomial::THETA, c(1))]);
        assert!(sf_multiply(&t, &t).unwrap().is_zero());
        let plus = sf(2, &[(OddMonomial::ONE, c(1)), (mono(&[1, 2], false), c(1))]);
        let minus = sf(2, &[(OddMonomial::ONE, c(1)), (mono(&[1, 2], false), c(-1))]);
        assert_eq!(sf_multiply(&plus, &minus).unwrap(), Superfield::scalar("U", 2, c(1)));
        let other = Superfield::<RF>::scalar("V", 2, c(1));
        assert!(matches!(sf_multiply(&plus, &other), Err(Error::ChartMismatch(_))));
    }

    #[test]
    fn substitute_examples() {
        let g = RF::var("x");
        let shift = sf(2, &[(mono(&[1, 2], false), g.clone())]);
        let sq = &x() * &x();
        let r = sf_substitute_even(&sq.with_var("y"), &shift, &x()).unwrap();
        assert_eq!(r.get(OddMonomial::ONE), sq);
        assert_eq!(r.get(mono(&[1, 2], false)), &c(2) * &(&x() * &g));
        let inv = &c(1) / &RF::var("y");
        let r = sf_substitute_even(&inv, &shift, &x()).unwrap();
        assert_eq!(r.get(mono(&[1, 2], false)), -(&g / &(&x() * &x())));
        let r = sf_substitute_even(&c(5), &shift, &x()).unwrap();
        assert_eq!(r, Superfield::scalar("U", 2, c(5)));
        let bad = sf(2, &[(OddMonomial::ONE, c(1))]);
        assert_eq!(sf_substitute_even(&c(1), &bad, &x()), Err(Error::NonNilpotentShift));
    }

    #[test]
    fn parity_enforced() {
        let mut s = Superfield::<RF>::zero("U", 2, Parity::Even);
        assert!(matches!(s.set(OddMonomial::THETA, c(1)), Err(Error::ParityMismatch(_))));
        assert!(matches!(s.set(mono(&[3], true), c(1)), Err(Error::ChartMismatch(_))));
    }

    fn model_uv() -> Supermorphism<RF> {
        Supermorphism::split(("U", "x"), ("V", "y"), 0, &c(-1) / &x(), &c(1) / &x()).unwrap()
    }

    #[test]
    fn split_composition_and_inverse() {
        let m = model_uv();
        let y = RF::var("y");
        let back = Supermorphism::split(("V", "y"), ("U", "x"), 0, &c(-1) / &y, &c(-1) / &y).unwrap();
        let id = morphism_compose(&back, &m).unwrap();
        assert_eq!(id, Supermorphism::identity("U", "x", 0).unwrap());
        let inv = morphism_invert(&m, None).unwrap();
        assert_eq!(inv, back);
    }

    #[test]
    fn order2_composition_example() {
        let d1 = Order2 { psi1: c(3), ..Order2::split(x(), c(1)) };
        let first = Supermorphism::order2(("U", "x"), ("V", "y"), &d1).unwrap();
        let y = RF::var("y");
        let d2 = Order2 { g12: c(1), ..Order2::split(y, c(1)) };
        let second = Supermorphism::order2(("V", "y"), ("W", "z"), &d2).unwrap();
        let got = morphism_compose(&second, &first).unwrap().order2_data().unwrap();
        assert_eq!(got, Order2 { g12: c(1), psi1: c(3), ..Order2::split(x(), c(1)) });
    }

    #[test]
    fn odd_shift_inverse() {
        let d = Order2 { psi1: c(7), ..Order2::split(x(), c(1)) };
        let m = Supermorphism::order2(("U", "x"), ("V", "y"), &d).unwrap();
        let inv = morphism_invert(&m, None).unwrap().order2_data().unwrap();
        let y = RF::var("y");
        assert_eq!(inv, Order2 { psi1: c(-7), ..Order2::split(y, c(1)) });
    }

    #[test]
    fn vanishing_zeta_rejected() {
        let r = Supermorphism::split(("U", "x"), ("V", "y"), 2, x(), c(0));
        assert!(matches!(r, Err(Error::VanishingZeta(_))));
    }

    #[test]
    fn non_mobius_body_needs_inverse() {
        let m = Supermorphism::split(("U", "x"), ("V", "y"), 0, &x() * &x(), &c(2) * &x()).unwrap();
        assert!(matches!(morphism_invert(&m, None), Err(Error::NonInvertibleBody(_))));
    }
}
