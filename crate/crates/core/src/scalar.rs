//! Exact coefficient arithmetic over the Gaussian rationals ℚ(i).
//!
//! [`RationalFunction`] values are kept in canonical form (monic denominator,
//! coprime numerator and denominator, zero is `0/1`), so derived `PartialEq`
//! on the polynomial parts coincides with equality of functions.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An element `re + im·i` of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        GaussianRational::new(
            BigRational::new(BigInt::from(n), BigInt::from(d)),
            BigRational::zero(),
        )
    }

    pub fn real(re: BigRational) -> Self {
        GaussianRational::new(re, BigRational::zero())
    }

    pub fn i() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        GaussianRational::default()
    }

    pub fn one() -> Self {
        GaussianRational::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        let norm = &self.re * &self.re + &self.im * &self.im;
        GaussianRational::new(&self.re / &norm, -(&self.im / &norm))
    }

    pub fn checked_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GaussianRational::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Integer value if this is a real integer that fits in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.im.is_zero() && self.re.is_integer() {
            self.re.to_integer().to_i64()
        } else {
            None
        }
    }

    /// True if the expression form needs parentheses when used as a factor.
    fn is_compound(&self) -> bool {
        !self.re.is_zero() && !self.im.is_zero()
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_part = |im: &BigRational| -> String {
            if im.is_one() {
                "i".to_string()
            } else if (-im.clone()).is_one() {
                "-i".to_string()
            } else {
                let a = im.abs();
                let s = if a.is_integer() {
                    format!("{}*i", a.numer())
                } else {
                    format!("{}*i/{}", a.numer(), a.denom())
                };
                if im.is_negative() {
                    format!("-{s}")
                } else {
                    s
                }
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => write!(f, "{}", im_part(&self.im)),
            (false, false) => {
                let im = im_part(&self.im.abs());
                let op = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{} {} {}", fmt_rat(&self.re), op, im)
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> Self::Output {
        GaussianRational::new(-self.re, -self.im)
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> Self::Output {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Add<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::real(&self.re * &o.re);
        }
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Div<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::real(&self.re / &o.re);
        }
        self * &o.inv()
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t { (&self).$m(&o) }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $m(self, o: &$t) -> $t { (&self).$m(o) }
        }
        impl $tr<$t> for &$t {
            type Output = $t;
            fn $m(self, o: $t) -> $t { self.$m(&o) }
        }
    )*};
}

forward_owned!(GaussianRational, Add add, Sub sub, Mul mul, Div div);

/// Dense univariate polynomial over ℚ(i), coefficients in ascending degree.
/// Trailing zeros are always trimmed; the zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<GaussianRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: GaussianRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(GaussianRational::one())
    }

    /// `c·x^k`.
    pub fn monomial(c: GaussianRational, k: usize) -> Self {
        let mut v = vec![GaussianRational::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn x() -> Self {
        Poly::monomial(GaussianRational::one(), 1)
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> GaussianRational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: &GaussianRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `Some(k)` when the polynomial is `c·x^k`.
    fn monomial_degree(&self) -> Option<usize> {
        let d = self.degree()?;
        self.coeffs[..d].iter().all(|c| c.is_zero()).then_some(d)
    }

    /// Exponent of the lowest nonzero term.
    fn low_degree(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let l = self.lead().inv();
        self.scale(&l)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &GaussianRational::from_int(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, at: &GaussianRational) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * at) + c;
        }
        acc
    }

    /// Quotient and remainder. Panics if `d` is zero.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("polynomial division by zero");
        let mut r = self.coeffs.clone();
        let lead_inv = d.lead().inv();
        let Some(nd) = self.degree() else {
            return (Poly::zero(), Poly::zero());
        };
        if nd < dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![GaussianRational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = &r[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] = &r[k + j] - &(&c * dc);
            }
            q[k] = c;
        }
        (Poly::new(q), Poly::new(r))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Poly::one();
        }
        if let Some(k) = a.monomial_degree().or_else(|| b.monomial_degree()) {
            let low = a.low_degree().min(b.low_degree()).min(k);
            return Poly::monomial(GaussianRational::one(), low);
        }
        if modp::coprime(a, b) {
            return Poly::one();
        }
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_real())
    }

    /// Render with the given variable name, e.g. `x^2 - 1/2*x + 3`.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = if c.is_compound() {
                (false, c.clone())
            } else if c.re.is_negative() || (c.re.is_zero() && c.im.is_negative()) {
                (true, -c)
            } else {
                (false, c.clone())
            };
            let power = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let coef = if mag.is_compound() {
                format!("({mag})")
            } else {
                mag.to_string()
            };
            let term = if k == 0 {
                coef
            } else if mag.is_one() {
                power
            } else {
                format!("{coef}*{power}")
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("x"))
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![GaussianRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        Poly::new(v)
    }
}

/// A univariate rational function `num/den` in a named variable.
///
/// Constants compare equal regardless of their variable name; arithmetic
/// between a constant and a non-constant adopts the non-constant's variable.
/// Arithmetic between two non-constants in different variables panics; use
/// [`rf_equal`] or [`RationalFunction::try_add`] for checked variants.
#[derive(Clone, Eq)]
pub struct RationalFunction {
    var: String,
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    /// Build `num/den` and canonicalize. Fails on a zero denominator.
    pub fn new(var: impl Into<String>, num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(var.into(), num, den))
    }

    /// Scale an already reduced pair so the denominator is monic.
    fn monic_den(var: String, num: Poly, den: Poly) -> Self {
        let l = den.lead();
        if l.is_one() {
            RationalFunction { var, num, den }
        } else {
            let li = l.inv();
            RationalFunction { var, num: num.scale(&li), den: den.scale(&li) }
        }
    }

    fn canonical(var: String, num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RationalFunction { var, num, den: Poly::one() };
        }
        let g = Poly::gcd(&num, &den);
        let (mut n, mut d) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let l = d.lead();
        if !l.is_one() {
            let li = l.inv();
            n = n.scale(&li);
            d = d.scale(&li);
        }
        RationalFunction { var, num: n, den: d }
    }

    pub fn from_poly(var: impl Into<String>, p: Poly) -> Self {
        RationalFunction { var: var.into(), num: p, den: Poly::one() }
    }

    pub fn constant(c: GaussianRational) -> Self {
        RationalFunction::from_poly("x", Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        RationalFunction::constant(GaussianRational::from_int(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        RationalFunction::constant(GaussianRational::from_ratio(n, d))
    }

    pub fn zero() -> Self {
        RationalFunction::from_int(0)
    }

    pub fn one() -> Self {
        RationalFunction::from_int(1)
    }

    /// The coordinate function itself.
    pub fn var(name: impl Into<String>) -> Self {
        RationalFunction::from_poly(name, Poly::x())
    }

    /// `c·v^k` for any integer `k`.
    pub fn monomial(name: impl Into<String>, c: GaussianRational, k: i64) -> Self {
        let name = name.into();
        if k >= 0 {
            RationalFunction::from_poly(name, Poly::monomial(c, k as usize))
        } else {
            RationalFunction::canonical(
                name,
                Poly::constant(c),
                Poly::monomial(GaussianRational::one(), (-k) as usize),
            )
        }
    }

    pub fn variable(&self) -> &str {
        &self.var
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num.is_constant() && self.num.lead().is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn is_real(&self) -> bool {
        self.num.is_real() && self.den.is_real()
    }

    /// The constant value if this is a constant.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        self.is_constant().then(|| self.num.coeff(0))
    }

    /// Same function with the variable renamed.
    pub fn with_var(&self, name: impl Into<String>) -> Self {
        RationalFunction { var: name.into(), num: self.num.clone(), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(self.var.clone(), self.den.clone(), self.num.clone()))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let e = e.unsigned_abs() as u32;
        Ok(RationalFunction {
            var: base.var.clone(),
            num: base.num.pow(e),
            den: base.den.pow(e),
        })
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return RationalFunction::zero().with_var(self.var.clone());
        }
        RationalFunction { var: self.var.clone(), num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn derivative(&self) -> Self {
        rf_derivative(self)
    }

    /// Laurent coefficients if the denominator is a power of the variable:
    /// returns pairs `(exponent, coefficient)` in ascending exponent order.
    pub fn laurent_terms(&self) -> Option<Vec<(i64, GaussianRational)>> {
        let d = self.den.degree().unwrap_or(0);
        if self.den != Poly::monomial(GaussianRational::one(), d) {
            return None;
        }
        Some(
            self.num
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k as i64 - d as i64, c.clone()))
                .collect(),
        )
    }

    /// Build from Laurent terms `(exponent, coefficient)`.
    pub fn from_laurent(name: &str, terms: &[(i64, GaussianRational)]) -> Self {
        let mut acc = RationalFunction::zero().with_var(name);
        for (k, c) in terms {
            acc = &acc + &RationalFunction::monomial(name, c.clone(), *k);
        }
        acc
    }

    /// Checked sum: errors when both operands are non-constant in different variables.
    pub fn try_add(&self, o: &Self) -> Result<Self> {
        let var = join_var(self, o)?;
        Ok(add_in(var, self, o))
    }

    fn unify<'a>(&'a self, o: &'a Self) -> &'a str {
        match join_var(self, o) {
            Ok(v) => v,
            Err(_) => panic!(
                "rational function variable mismatch: `{}` vs `{}`",
                self.var, o.var
            ),
        }
    }

    /// Render as a canonical expression string that parses back to `self`.
    pub fn render(&self) -> String {
        let n = self.num.render(&self.var);
        if self.den.is_constant() {
            return n;
        }
        let num_single = self.num.coeffs().iter().filter(|c| !c.is_zero()).count() == 1
            && !self.num.lead().is_compound()
            && self.num.lead().re.is_integer()
            && self.num.lead().im.is_integer();
        let num = if num_single && !n.contains('*') { n } else { format!("({n})") };
        let den_single = self.den.coeffs().iter().filter(|c| !c.is_zero()).count() == 1;
        let d = self.den.render(&self.var);
        let den = if den_single { d } else { format!("({d})") };
        format!("{num}/{den}")
    }
}

fn join_var<'a>(a: &'a RationalFunction, b: &'a RationalFunction) -> Result<&'a str> {
    if a.var == b.var || b.is_constant() {
        Ok(&a.var)
    } else if a.is_constant() {
        Ok(&b.var)
    } else {
        Err(Error::VariableMismatch { left: a.var.clone(), right: b.var.clone() })
    }
}

fn add_in(var: &str, a: &RationalFunction, b: &RationalFunction) -> RationalFunction {
    if a.is_zero() {
        return b.with_var(var);
    }
    if b.is_zero() {
        return a.with_var(var);
    }
    if a.den == b.den {
        return RationalFunction::canonical(var.to_string(), &a.num + &b.num, a.den.clone());
    }
    // Henrici: only the common part of the denominators can cancel.
    let g = Poly::gcd(&a.den, &b.den);
    if g.is_constant() {
        let n = &(&a.num * &b.den) + &(&b.num * &a.den);
        return RationalFunction::monic_den(var.to_string(), n, &a.den * &b.den);
    }
    let ad = a.den.div_rem(&g).0;
    let bd = b.den.div_rem(&g).0;
    let t = &(&a.num * &bd) + &(&b.num * &ad);
    if t.is_zero() {
        return RationalFunction::zero().with_var(var);
    }
    let g2 = Poly::gcd(&t, &g);
    if g2.is_constant() {
        return RationalFunction::monic_den(var.to_string(), t, &ad * &b.den);
    }
    RationalFunction::monic_den(var.to_string(), t.div_rem(&g2).0, &ad * &b.den.div_rem(&g2).0)
}

impl PartialEq for RationalFunction {
    fn eq(&self, o: &Self) -> bool {
        (self.var == o.var || (self.is_constant() && o.is_constant()))
            && self.num == o.num
            && self.den == o.den
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { var: self.var.clone(), num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

impl Add<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        let var = self.unify(o);
        add_in(var, self, o)
    }
}

impl Sub<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: &RationalFunction) -> RationalFunction {
        self + &(-o)
    }
}

impl Mul<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        let var = self.unify(o).to_string();
        if self.is_zero() || o.is_zero() {
            return RationalFunction::zero().with_var(var);
        }
        // Cross-cancel first so the products stay reduced.
        let g1 = Poly::gcd(&self.num, &o.den);
        let g2 = Poly::gcd(&o.num, &self.den);
        let cut = |p: &Poly, g: &Poly| if g.is_constant() { p.clone() } else { p.div_rem(g).0 };
        let n = &cut(&self.num, &g1) * &cut(&o.num, &g2);
        let d = &cut(&o.den, &g1) * &cut(&self.den, &g2);
        let l = d.lead();
        if l.is_one() {
            RationalFunction { var, num: n, den: d }
        } else {
            let li = l.inv();
            RationalFunction { var, num: n.scale(&li), den: d.scale(&li) }
        }
    }
}

impl Div<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    /// Panics on division by zero; use [`RationalFunction::inv`] to check.
    fn div(self, o: &RationalFunction) -> RationalFunction {
        self * &o.inv().expect("rational function division by zero")
    }
}

forward_owned!(RationalFunction, Add add, Sub sub, Mul mul, Div div);

/// Sum of many terms: numerators over a shared denominator are added before
/// any reduction.
pub fn rf_sum(items: &[RationalFunction]) -> RationalFunction {
    let var = items
        .iter()
        .find(|it| !it.is_constant())
        .or(items.first())
        .map_or("x", |it| it.var.as_str())
        .to_string();
    let mut groups: Vec<(&Poly, Poly)> = Vec::new();
    for it in items.iter().filter(|it| !it.is_zero()) {
        match groups.iter_mut().find(|(d, _)| **d == it.den) {
            Some((_, n)) => *n = &*n + &it.num,
            None => groups.push((&it.den, it.num.clone())),
        }
    }
    let mut acc = RationalFunction::zero().with_var(var.clone());
    for (d, n) in groups {
        let part = RationalFunction::canonical(var.clone(), n, d.clone());
        acc = add_in(&var, &acc, &part);
    }
    acc
}

/// Quotient-rule derivative.
pub fn rf_derivative(f: &RationalFunction) -> RationalFunction {
    if f.is_constant() {
        return RationalFunction::zero().with_var(f.var.clone());
    }
    if f.den.is_constant() {
        return RationalFunction { var: f.var.clone(), num: f.num.derivative(), den: f.den.clone() };
    }
    // With d = g·e and d′ = g·h: f′ = (n′e − nh)/(d·e).
    let dd = f.den.derivative();
    let g = Poly::gcd(&f.den, &dd);
    let (e, h) = if g.is_constant() { (f.den.clone(), dd) } else { (f.den.div_rem(&g).0, dd.div_rem(&g).0) };
    let n = &(&f.num.derivative() * &e) - &(&f.num * &h);
    RationalFunction::canonical(f.var.clone(), n, &f.den * &e)
}

/// `f∘g`, in `g`'s variable.
pub fn rf_compose(f: &RationalFunction, g: &RationalFunction) -> Result<RationalFunction> {
    let var = g.var.clone();
    if f.is_constant() {
        return Ok(f.with_var(var));
    }
    // P(n/d)/Q(n/d) = Σ p_i n^i d^(D-i) / Σ q_i n^i d^(D-i), D = max degree.
    let top = f.num.degree().unwrap_or(0).max(f.den.degree().unwrap_or(0));
    let mut npow = vec![Poly::one()];
    let mut dpow = vec![Poly::one()];
    for i in 0..top {
        npow.push(&npow[i] * &g.num);
        dpow.push(&dpow[i] * &g.den);
    }
    let homog = |p: &Poly| -> Poly {
        let mut acc = Poly::zero();
        for (i, c) in p.coeffs().iter().enumerate() {
            if !c.is_zero() {
                acc = &acc + &(&npow[i] * &dpow[top - i]).scale(c);
            }
        }
        acc
    };
    let d = homog(&f.den);
    if d.is_zero() {
        return Err(Error::PoleAtCompositionPoint);
    }
    Ok(RationalFunction::canonical(var, homog(&f.num), d))
}

/// Structural equality of canonical forms. Both operands must share a variable
/// unless at least one is constant.
pub fn rf_equal(f: &RationalFunction, g: &RationalFunction) -> Result<bool> {
    join_var(f, g)?;
    Ok(f == g)
}

/// Coprimality certificate through the reduction `ℤ[i] → 𝔽_p`, `i ↦ √−1`.
/// When neither leading coefficient vanishes mod `p`, the degree of the
/// reduced gcd bounds the degree of the true one from above.
mod modp {
    use std::sync::OnceLock;

    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    use super::{GaussianRational, Poly};

    const P: u64 = 1_000_000_009;

    fn mul(a: u64, b: u64) -> u64 {
        a * b % P
    }

    fn pow(mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    }

    fn inv(a: u64) -> u64 {
        pow(a, P - 2)
    }

    fn sqrt_minus_one() -> u64 {
        static ROOT: OnceLock<u64> = OnceLock::new();
        *ROOT.get_or_init(|| {
            let g = (2..).find(|&g| pow(g, (P - 1) / 2) == P - 1).unwrap();
            pow(g, (P - 1) / 4)
        })
    }

    fn int(n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(P)).to_u64().unwrap()
    }

    fn rat(q: &BigRational) -> Option<u64> {
        let d = int(q.denom());
        (d != 0).then(|| mul(int(q.numer()), inv(d)))
    }

    fn scalar(c: &GaussianRational) -> Option<u64> {
        Some((rat(&c.re)? + mul(rat(&c.im)?, sqrt_minus_one())) % P)
    }

    fn reduce(p: &Poly) -> Option<Vec<u64>> {
        let v = p.coeffs().iter().map(scalar).collect::<Option<Vec<_>>>()?;
        (*v.last()? != 0).then_some(v)
    }

    fn rem(mut a: Vec<u64>, b: &[u64]) -> Vec<u64> {
        let li = inv(*b.last().unwrap());
        while a.len() >= b.len() {
            let c = mul(*a.last().unwrap(), li);
            let shift = a.len() - b.len();
            for (j, bc) in b.iter().enumerate() {
                a[shift + j] = (a[shift + j] + P - mul(c, *bc)) % P;
            }
            a.pop();
            while a.last() == Some(&0) {
                a.pop();
            }
        }
        a
    }

    /// `true` only if `gcd(a, b)` is certainly constant.
    pub(super) fn coprime(a: &Poly, b: &Poly) -> bool {
        let (Some(mut a), Some(mut b)) = (reduce(a), reduce(b)) else {
            return false;
        };
        while !b.is_empty() {
            let r = rem(a, &b);
            a = b;
            b = r;
        }
        a.len() == 1
    }
}

/// A Möbius map `(a·v + b)/(c·v + d)` with `ad − bc ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mobius {
    pub a: GaussianRational,
    pub b: GaussianRational,
    pub c: GaussianRational,
    pub d: GaussianRational,
}

impl Mobius {
    /// Recognize `f` as a Möbius map.
    pub fn detect(f: &RationalFunction) -> Option<Mobius> {
        let (n, d) = (f.numer(), f.denom());
        if n.degree().unwrap_or(0) > 1 || d.degree().unwrap_or(0) > 1 {
            return None;
        }
        let m = Mobius { a: n.coeff(1), b: n.coeff(0), c: d.coeff(1), d: d.coeff(0) };
        (!m.det().is_zero()).then_some(m)
    }

    pub fn det(&self) -> GaussianRational {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    /// `(d·w − b)/(−c·w + a)` in variable `var`.
    pub fn inverse(&self, var: &str) -> RationalFunction {
        RationalFunction::new(
            var,
            Poly::new(vec![-&self.b, self.d.clone()]),
            Poly::new(vec![self.a.clone(), -&self.c]),
        )
        .expect("Möbius inverse has nonzero denominator")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RationalFunction {
        RationalFunction::var("x")
    }

    fn c(n: i64) -> RationalFunction {
        RationalFunction::from_int(n)
    }

    #[test]
    fn derivative_examples() {
        let f = &c(-1) / &x();
        assert_eq!(rf_derivative(&f), &c(1) / &(&x() * &x()));
        assert!(rf_derivative(&c(7)).is_zero());
        let g = &(&(&x() * &x()) - &c(1)) / &(&x() - &c(1));
        assert_eq!(g, &x() + &c(1));
        assert_eq!(rf_derivative(&g), c(1));
    }

    #[test]
    fn derivative_with_repeated_factors() {
        // d/dx (x+1)^-3 = -3 (x+1)^-4
        let l = &x() + &c(1);
        let f = l.pow(-3).unwrap();
        assert_eq!(rf_derivative(&f), &c(-3) * &l.pow(-4).unwrap());
        let d = &(&(&x() - &c(1)) * &(&x() - &c(1))) * &(&x() + &c(2));
        let f = &(&x() * &x()) / &d;
        let (n, dp) = (f.numer(), f.denom());
        let naive = RationalFunction::new(
            "x",
            &(&n.derivative() * dp) - &(n * &dp.derivative()),
            dp * dp,
        )
        .unwrap();
        assert_eq!(rf_derivative(&f), naive);
    }

    #[test]
    fn modular_coprimality_certificate() {
        let a = &(&x() - &c(1)) * &(&x() + &c(2));
        let b = &(&x() - &c(3)) * &(&x() * &x() + &c(1));
        assert!(modp::coprime(a.numer(), b.numer()));
        let shared = &(&x() - &c(1)) * &(&x() - &c(3));
        assert!(!modp::coprime(a.numer(), shared.numer()));
        let gi = &(&x() - &RationalFunction::constant(GaussianRational::i())) * &x();
        assert_eq!(Poly::gcd(b.numer(), &(&gi.numer().clone() + &Poly::one())).degree(), Some(0));
        assert_eq!(Poly::gcd(b.numer(), &(&(&x() * &x()) + &c(1)).numer().clone()).degree(), Some(2));
    }

    #[test]
    fn sum_matches_pairwise_addition() {
        let items = vec![
            &c(1) / &x(),
            &c(2) / &(&x() - &c(1)),
            &c(-1) / &x(),
            &x() * &x(),
            &c(-2) / &(&x() - &c(1)),
        ];
        let pairwise = items.iter().fold(RationalFunction::zero(), |a, b| &a + b);
        assert_eq!(rf_sum(&items), pairwise);
        assert_eq!(rf_sum(&items), &x() * &x());
        assert!(rf_sum(&[]).is_zero());
    }

    #[test]
    fn compose_examples() {
        let y = RationalFunction::var("y");
        let f = &c(-1) / &y;
        let g = &c(-1) / &x();
        assert_eq!(rf_compose(&f, &g).unwrap(), x());
        let h = &(&x() * &x()) / &(&x() + &c(3));
        assert_eq!(rf_compose(&h.with_var("y"), &x()).unwrap(), h);
        let sq = &y * &y;
        let shifted = rf_compose(&sq, &(&x() + &c(1))).unwrap();
        assert_eq!(shifted, &(&(&x() * &x()) + &(&c(2) * &x())) + &c(1));
        assert_eq!(shifted.variable(), "x");
        assert_eq!(rf_compose(&f, &c(0)), Err(Error::PoleAtCompositionPoint));
    }

    #[test]
    fn equality_examples() {
        let a = &(&(&x() * &x()) - &c(1)) / &(&x() - &c(1));
        assert!(rf_equal(&a, &(&x() + &c(1))).unwrap());
        let inv = &c(1) / &x();
        assert!(!rf_equal(&inv, &(-&inv)).unwrap());
        let zero = &(&x() - &x()) / &c(5);
        assert!(rf_equal(&RationalFunction::zero(), &zero).unwrap());
        assert_eq!(zero.denom(), &Poly::one());
        assert!(matches!(
            rf_equal(&x(), &RationalFunction::var("y")),
            Err(Error::VariableMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_arithmetic() {
        let i = GaussianRational::i();
        assert_eq!(&i * &i, GaussianRational::from_int(-1));
        let z = GaussianRational::new(
            BigRational::new(3.into(), 4.into()),
            BigRational::new((-2).into(), 5.into()),
        );
        assert_eq!(&z * &z.inv(), GaussianRational::one());
        assert_eq!(z.to_string(), "3/4 - 2*i/5");
    }

    #[test]
    fn monic_denominator_and_gcd() {
        let f = RationalFunction::new(
            "x",
            Poly::new(vec![GaussianRational::from_int(2), GaussianRational::from_int(2)]),
            Poly::new(vec![GaussianRational::from_int(4), GaussianRational::from_int(4)]),
        )
        .unwrap();
        assert_eq!(f, RationalFunction::from_ratio(1, 2));
        let g = &c(3) / &(&c(2) * &x());
        assert!(g.denom().lead().is_one());
        assert_eq!(g.numer().coeff(0), GaussianRational::from_ratio(3, 2));
    }

    #[test]
    fn complex_square_root_of_derivative() {
        // ζ = i/x squares to −1/x² = d/dx(1/x).
        let zeta = RationalFunction::monomial("x", GaussianRational::i(), -1);
        assert_eq!(&zeta * &zeta, rf_derivative(&(&c(1) / &x())));
    }

    #[test]
    fn mobius_detection_and_inverse() {
        let f = &c(-1) / &(&x() - &c(1));
        let m = Mobius::detect(&f).unwrap();
        let inv = m.inverse("y");
        assert_eq!(rf_compose(&inv, &f).unwrap(), x());
        assert!(Mobius::detect(&(&x() * &x())).is_none());
    }

    #[test]
    fn laurent_round_trip() {
        let terms = vec![
            (-2, GaussianRational::from_int(3)),
            (0, GaussianRational::from_int(1)),
            (2, GaussianRational::from_ratio(-1, 2)),
        ];
        let f = RationalFunction::from_laurent("x", &terms);
        assert_eq!(f.laurent_terms().unwrap(), terms);
        assert!((&c(1) / &(&x() + &c(1))).laurent_terms().is_none());
    }

    #[test]
    fn render_shapes() {
        let f = &(&x() * &x()) - &(&RationalFunction::from_ratio(1, 2) * &x());
        assert_eq!(f.render(), "x^2 - 1/2*x");
        assert_eq!((&c(-1) / &x()).render(), "-1/x");
        assert_eq!((&c(1) / &(&x() + &c(1))).render(), "1/(x + 1)");
    }
}
