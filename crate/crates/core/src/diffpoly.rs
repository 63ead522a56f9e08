//! Free differential polynomial ring over named function symbols.
//!
//! Each symbol carries a derivative order, a Grassmann parity and the name of
//! the coordinate it is a function of. Products of odd symbols are kept in a
//! canonical order with the Koszul sign folded into the coefficient.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_count(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// A formal function symbol `name^(order)` of coordinate `var`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffSymbol {
    pub name: String,
    pub order: u32,
    pub var: String,
    pub parity: Parity,
}

impl DiffSymbol {
    pub fn new(name: &str, var: &str, parity: Parity) -> Self {
        DiffSymbol { name: name.to_string(), order: 0, var: var.to_string(), parity }
    }

    pub fn even(name: &str, var: &str) -> Self {
        DiffSymbol::new(name, var, Parity::Even)
    }

    pub fn odd(name: &str, var: &str) -> Self {
        DiffSymbol::new(name, var, Parity::Odd)
    }

    pub fn derivative(&self) -> Self {
        self.nth(self.order + 1)
    }

    pub fn nth(&self, order: u32) -> Self {
        DiffSymbol { order, ..self.clone() }
    }

    pub fn is_odd(&self) -> bool {
        self.parity == Parity::Odd
    }

    pub fn render(&self) -> String {
        format!("{}{}", self.name, "'".repeat(self.order as usize))
    }
}

/// A canonically sorted product of symbols with positive exponents.
/// Odd symbols never appear with exponent above one.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(DiffSymbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn symbol(s: DiffSymbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn factors(&self) -> &[(DiffSymbol, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_count(self.0.iter().filter(|(s, _)| s.is_odd()).count())
    }

    pub fn exponent(&self, s: &DiffSymbol) -> u32 {
        self.0.iter().find(|(t, _)| t == s).map_or(0, |(_, e)| *e)
    }

    /// Factors expanded into a flat list in canonical order.
    fn flat(&self) -> Vec<DiffSymbol> {
        self.0
            .iter()
            .flat_map(|(s, e)| std::iter::repeat_n(s.clone(), *e as usize))
            .collect()
    }

    /// `self·other = sign·m`; `None` when an odd symbol repeats.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        let mut negative = false;
        for (b, _) in other.0.iter().filter(|(s, _)| s.is_odd()) {
            if self.0.iter().any(|(a, _)| a == b) {
                return None;
            }
            let passed = self.0.iter().filter(|(a, _)| a.is_odd() && a > b).count();
            if passed % 2 == 1 {
                negative = !negative;
            }
        }
        let mut out: Vec<(DiffSymbol, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let take_left = j >= other.0.len() || (i < self.0.len() && self.0[i].0 <= other.0[j].0);
            let (s, e) = if take_left {
                i += 1;
                self.0[i - 1].clone()
            } else {
                j += 1;
                other.0[j - 1].clone()
            };
            match out.last_mut() {
                Some((t, f)) if *t == s => *f += e,
                _ => out.push((s, e)),
            }
        }
        Some((Monomial(out), negative))
    }

    /// Removes `d`'s factors: returns `rest` with `d·rest = sign·self`.
    pub fn divide(&self, d: &Monomial) -> Option<(Monomial, bool)> {
        let mut rest = self.0.clone();
        for (s, e) in &d.0 {
            let pos = rest.iter().position(|(t, _)| t == s)?;
            if rest[pos].1 < *e {
                return None;
            }
            rest[pos].1 -= e;
            if rest[pos].1 == 0 {
                rest.remove(pos);
            }
        }
        let rest = Monomial(rest);
        let (check, negative) = d.mul(&rest)?;
        debug_assert_eq!(&check, self);
        Some((rest, negative))
    }

    /// Weight `Σ prec(name)·(order+1)·exponent` used by the termination check.
    pub fn weight(&self, prec: &BTreeMap<String, u64>) -> u64 {
        self.0
            .iter()
            .map(|(s, e)| prec.get(&s.name).copied().unwrap_or(1) * (s.order as u64 + 1) * *e as u64)
            .sum()
    }

    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|(s, e)| if *e == 1 { s.render() } else { format!("{}^{}", s.render(), e) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// A finite sum of Gaussian-rational multiples of monomials.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct DiffPolynomial {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl DiffPolynomial {
    pub fn zero() -> Self {
        DiffPolynomial::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        let mut p = DiffPolynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn from_int(n: i64) -> Self {
        DiffPolynomial::constant(GaussianRational::from_int(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        DiffPolynomial::constant(GaussianRational::from_ratio(n, d))
    }

    pub fn one() -> Self {
        DiffPolynomial::from_int(1)
    }

    pub fn symbol(s: &DiffSymbol) -> Self {
        DiffPolynomial::term(GaussianRational::one(), Monomial::symbol(s.clone()))
    }

    pub fn term(c: GaussianRational, m: Monomial) -> Self {
        let mut p = DiffPolynomial::zero();
        p.add_term(m, c);
        p
    }

    /// Ordered product of symbols, e.g. `[a, b]` gives `a·b` with its sign.
    pub fn product(symbols: &[DiffSymbol]) -> Self {
        symbols.iter().fold(DiffPolynomial::one(), |acc, s| &acc * &DiffPolynomial::symbol(s))
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = DiffPolynomial::zero();
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(DiffPolynomial::one(), |acc, _| &acc * self)
    }

    /// Parity of a homogeneous polynomial; `None` if mixed or zero.
    pub fn parity(&self) -> Option<Parity> {
        let set: BTreeSet<Parity> = self.terms.keys().map(|m| m.parity()).collect();
        (set.len() == 1).then(|| *set.iter().next().expect("one parity"))
    }

    pub fn symbols(&self) -> BTreeSet<DiffSymbol> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(s, _)| s.clone())).collect()
    }

    /// Formal derivative: every symbol's order increments (graded Leibniz with
    /// an even derivation).
    pub fn derive(&self) -> Self {
        self.derive_with(&|s: &DiffSymbol| (DiffPolynomial::symbol(&s.derivative()), true))
    }

    /// `∂/∂var` where symbols of other coordinates pick up the factor from
    /// `chain` (`∂s/∂var = chain[s.var]·s'`). Symbols of coordinates absent
    /// from `chain` are differentiated formally.
    pub fn derive_wrt(&self, var: &str, chain: &BTreeMap<String, DiffPolynomial>) -> Self {
        self.derive_with(&|s: &DiffSymbol| {
            let d = DiffPolynomial::symbol(&s.derivative());
            if s.var == var {
                return (d, true);
            }
            match chain.get(&s.var) {
                Some(f) => (&d * f, true),
                None => (d, true),
            }
        })
    }

    fn derive_with(&self, ds: &dyn Fn(&DiffSymbol) -> (DiffPolynomial, bool)) -> Self {
        let mut out = DiffPolynomial::zero();
        for (m, c) in &self.terms {
            let flat = m.flat();
            for j in 0..flat.len() {
                let (d, _) = ds(&flat[j]);
                let piece = &(&DiffPolynomial::product(&flat[..j]) * &d)
                    * &DiffPolynomial::product(&flat[j + 1..]);
                out = &out + &piece.scale(c);
            }
        }
        out
    }

    /// Group terms by the power of `s` (an even symbol): `Σ_k s^k·coeff_k`.
    pub fn collect_by(&self, s: &DiffSymbol) -> BTreeMap<u32, DiffPolynomial> {
        let mut out: BTreeMap<u32, DiffPolynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.exponent(s);
            let rest = Monomial(m.0.iter().filter(|(t, _)| t != s).cloned().collect());
            out.entry(k).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (m, c) in &self.terms {
            let neg = if c.im.is_zero() {
                c.re.is_negative()
            } else {
                c.re.is_zero() && c.im.is_negative()
            };
            let mag = if neg { -c } else { c.clone() };
            let coef = mag.to_string();
            let coef = if !mag.re.is_zero() && !mag.im.is_zero() { format!("({coef})") } else { coef };
            let body = if m.is_one() {
                coef
            } else if mag.is_one() {
                m.render()
            } else {
                format!("{coef}*{}", m.render())
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

impl fmt::Display for DiffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Debug for DiffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl Neg for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn neg(self) -> DiffPolynomial {
        self.scale(&GaussianRational::from_int(-1))
    }
}

impl Neg for DiffPolynomial {
    type Output = DiffPolynomial;
    fn neg(self) -> DiffPolynomial {
        -&self
    }
}

impl Add<&DiffPolynomial> for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn add(self, o: &DiffPolynomial) -> DiffPolynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&DiffPolynomial> for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn sub(self, o: &DiffPolynomial) -> DiffPolynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&DiffPolynomial> for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn mul(self, o: &DiffPolynomial) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if let Some((m, neg)) = a.mul(b) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }
}

macro_rules! forward_owned_dp {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<DiffPolynomial> for DiffPolynomial {
            type Output = DiffPolynomial;
            fn $m(self, o: DiffPolynomial) -> DiffPolynomial { (&self).$m(&o) }
        }
        impl $tr<&DiffPolynomial> for DiffPolynomial {
            type Output = DiffPolynomial;
            fn $m(self, o: &DiffPolynomial) -> DiffPolynomial { (&self).$m(o) }
        }
        impl $tr<DiffPolynomial> for &DiffPolynomial {
            type Output = DiffPolynomial;
            fn $m(self, o: DiffPolynomial) -> DiffPolynomial { self.$m(&o) }
        }
    )*};
}

forward_owned_dp!(Add add, Sub sub, Mul mul);

/// `∂^k/∂x^k` of a derivative-order-`k` symbol rule extends to all higher
/// orders when the rule's symbol lives in the base coordinate.
#[derive(Clone, Debug)]
pub struct SymbolRule {
    pub lhs: DiffSymbol,
    pub rhs: DiffPolynomial,
    pub tag: String,
}

/// Replace any occurrence of the monomial `lhs` by `rhs`.
#[derive(Clone, Debug)]
pub struct MonomialRule {
    pub lhs: Monomial,
    pub rhs: DiffPolynomial,
    pub tag: String,
}

/// A terminating set of rewrite rules.
///
/// Symbol rules are applied to a fixpoint first, then monomial rules. The
/// builder rejects rule sets whose symbol-rule dependency graph has a cycle
/// (a self-reference is allowed only at strictly lower derivative order, and
/// only for rules that do not extend to derivatives) and monomial rules that
/// do not strictly decrease the weight `Σ prec(name)·(order+1)·exponent`.
#[derive(Clone, Debug, Default)]
pub struct RewriteSystem {
    base_var: String,
    chain: BTreeMap<String, DiffPolynomial>,
    precedence: BTreeMap<String, u64>,
    symbol_rules: Vec<SymbolRule>,
    monomial_rules: Vec<MonomialRule>,
}

impl RewriteSystem {
    pub fn builder(base_var: &str) -> RewriteBuilder {
        RewriteBuilder { sys: RewriteSystem { base_var: base_var.to_string(), ..Default::default() } }
    }

    pub fn empty(base_var: &str) -> RewriteSystem {
        RewriteSystem { base_var: base_var.to_string(), ..Default::default() }
    }

    pub fn base_var(&self) -> &str {
        &self.base_var
    }

    pub fn chain(&self) -> &BTreeMap<String, DiffPolynomial> {
        &self.chain
    }

    pub fn tags(&self) -> BTreeSet<String> {
        self.symbol_rules
            .iter()
            .map(|r| r.tag.clone())
            .chain(self.monomial_rules.iter().map(|r| r.tag.clone()))
            .collect()
    }

    /// The same system with every rule carrying `tag` removed.
    pub fn without_tag(&self, tag: &str) -> RewriteSystem {
        let mut s = self.clone();
        s.symbol_rules.retain(|r| r.tag != tag);
        s.monomial_rules.retain(|r| r.tag != tag);
        s
    }

    /// Derivative in the base coordinate using this system's chain factors.
    pub fn derive(&self, p: &DiffPolynomial) -> DiffPolynomial {
        p.derive_wrt(&self.base_var, &self.chain)
    }

    fn extends(&self, r: &SymbolRule) -> bool {
        r.lhs.var == self.base_var
    }

    /// Replacement for `s` if some symbol rule applies.
    fn symbol_image(&self, s: &DiffSymbol) -> Option<DiffPolynomial> {
        for r in &self.symbol_rules {
            if r.lhs == *s {
                return Some(r.rhs.clone());
            }
            if self.extends(r)
                && r.lhs.name == s.name
                && r.lhs.var == s.var
                && r.lhs.parity == s.parity
                && s.order > r.lhs.order
            {
                let mut p = r.rhs.clone();
                for _ in r.lhs.order..s.order {
                    p = self.derive(&p);
                }
                return Some(p);
            }
        }
        None
    }

    fn symbol_normal(&self, m: &Monomial) -> bool {
        m.0.iter().all(|(s, _)| self.symbol_image(s).is_none())
    }

    fn symbol_pass(&self, p: &DiffPolynomial) -> Option<DiffPolynomial> {
        let mut changed = false;
        let mut out = DiffPolynomial::zero();
        for (m, c) in &p.terms {
            let flat = m.flat();
            let hit = flat.iter().enumerate().find_map(|(j, s)| self.symbol_image(s).map(|r| (j, r)));
            match hit {
                Some((j, r)) => {
                    changed = true;
                    let piece = &(&DiffPolynomial::product(&flat[..j]) * &r)
                        * &DiffPolynomial::product(&flat[j + 1..]);
                    out = &out + &piece.scale(c);
                }
                None => out.add_term(m.clone(), c.clone()),
            }
        }
        changed.then_some(out)
    }

    fn monomial_pass(&self, p: &DiffPolynomial) -> Option<DiffPolynomial> {
        let mut changed = false;
        let mut out = DiffPolynomial::zero();
        for (m, c) in &p.terms {
            let hit = self
                .monomial_rules
                .iter()
                .find_map(|r| m.divide(&r.lhs).map(|(rest, neg)| (r, rest, neg)));
            match hit {
                Some((r, rest, neg)) => {
                    changed = true;
                    let piece = &r.rhs * &DiffPolynomial::term(GaussianRational::one(), rest);
                    let c = if neg { -c } else { c.clone() };
                    out = &out + &piece.scale(&c);
                }
                None => out.add_term(m.clone(), c.clone()),
            }
        }
        changed.then_some(out)
    }
}

#[derive(Clone)]
pub struct RewriteBuilder {
    sys: RewriteSystem,
}

impl RewriteBuilder {
    /// Declare `∂s/∂base = factor·∂s/∂var` for symbols of coordinate `var`.
    pub fn chain(mut self, var: &str, factor: DiffPolynomial) -> Self {
        self.sys.chain.insert(var.to_string(), factor);
        self
    }

    pub fn precedence(mut self, name: &str, weight: u64) -> Self {
        self.sys.precedence.insert(name.to_string(), weight);
        self
    }

    pub fn symbol(mut self, lhs: DiffSymbol, rhs: DiffPolynomial, tag: &str) -> Self {
        self.sys.symbol_rules.push(SymbolRule { lhs, rhs, tag: tag.to_string() });
        self
    }

    pub fn monomial(mut self, lhs: &[DiffSymbol], rhs: DiffPolynomial, tag: &str) -> Self {
        let p = DiffPolynomial::product(lhs);
        let (m, c) = p.terms.into_iter().next().expect("monomial rule lhs must be nonzero");
        // Normalize so the rule reads `m → rhs/c`.
        let rhs = rhs.scale(&c.inv());
        self.sys.monomial_rules.push(MonomialRule { lhs: m, rhs, tag: tag.to_string() });
        self
    }

    pub fn build(self) -> Result<RewriteSystem> {
        let sys = self.sys;
        let bad = |msg: String| Err(Error::NonTerminatingRuleSet(msg));

        let mut seen = BTreeSet::new();
        for r in &sys.symbol_rules {
            if !seen.insert((r.lhs.name.clone(), r.lhs.order, r.lhs.var.clone())) {
                return bad(format!("duplicate rule for {}", r.lhs.render()));
            }
            if !r.rhs.is_zero() && r.rhs.parity() != Some(r.lhs.parity) {
                return bad(format!("rule for {} changes parity", r.lhs.render()));
            }
        }

        // Name-level dependency graph of symbol rules.
        let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for r in &sys.symbol_rules {
            for s in r.rhs.symbols() {
                if s.name == r.lhs.name {
                    if sys.extends(r) || s.order >= r.lhs.order {
                        return bad(format!("rule for {} refers to itself", r.lhs.render()));
                    }
                    continue;
                }
                edges.entry(r.lhs.name.clone()).or_default().insert(s.name.clone());
            }
        }
        fn visit(
            n: &str,
            edges: &BTreeMap<String, BTreeSet<String>>,
            state: &mut BTreeMap<String, u8>,
        ) -> bool {
            match state.get(n) {
                Some(1) => return false,
                Some(2) => return true,
                _ => {}
            }
            state.insert(n.to_string(), 1);
            for m in edges.get(n).into_iter().flatten() {
                if !visit(m, edges, state) {
                    return false;
                }
            }
            state.insert(n.to_string(), 2);
            true
        }
        let mut state = BTreeMap::new();
        for n in edges.keys() {
            if !visit(n, &edges, &mut state) {
                return bad(format!("symbol rules form a cycle through `{n}`"));
            }
        }

        for r in &sys.monomial_rules {
            let w = r.lhs.weight(&sys.precedence);
            for (m, _) in r.rhs.terms() {
                if m.weight(&sys.precedence) >= w {
                    return bad(format!(
                        "monomial rule {} does not decrease weight at {}",
                        r.lhs.render(),
                        m.render()
                    ));
                }
                if !sys.symbol_normal(m) {
                    return bad(format!(
                        "right side of monomial rule {} is not symbol-normal",
                        r.lhs.render()
                    ));
                }
            }
            if r.rhs.parity().is_some_and(|p| p != r.lhs.parity()) {
                return bad(format!("rule for {} changes parity", r.lhs.render()));
            }
        }
        Ok(sys)
    }
}

/// Normal form of `p` under `rules`.
pub fn dp_reduce(p: &DiffPolynomial, rules: &RewriteSystem) -> DiffPolynomial {
    let mut cur = p.clone();
    while let Some(next) = rules.symbol_pass(&cur) {
        cur = next;
    }
    while let Some(next) = rules.monomial_pass(&cur) {
        cur = next;
    }
    cur
}

/// Formal derivative (every symbol's order increments).
pub fn dp_derive(p: &DiffPolynomial) -> DiffPolynomial {
    p.derive()
}
