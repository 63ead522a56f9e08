//! Textual expressions and the atlas document format.
//!
//! Expressions use integers, `i`, identifiers, `+ - * / ^` with integer
//! exponents, parentheses and unary minus. Documents are either the
//! line-oriented text format described in the README or the equivalent JSON
//! object.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::atlas::{AtlasCochain, Atlas, Cover, Transition};
use crate::cech::{to_leading, CechCochain, LineBundleModel};
use crate::deform::{build_construction, twist_by_g12, ChartSplitting, SplittingMap};
use crate::diffpoly::{DiffPolynomial as DP, DiffSymbol};
use crate::error::{Error, Result};
use crate::grassmann::{OddMonomial, Superfield, Supermorphism};
use crate::diffpoly::Parity;
use crate::scalar::{GaussianRational, RationalFunction as RF};

// ---------------------------------------------------------------- expressions

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String, u32),
    Op(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Int(src[s..i].parse().expect("digits")), s));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let name = src[s..i].to_string();
            let mut primes = 0;
            while i < b.len() && b[i] == b'\'' {
                primes += 1;
                i += 1;
            }
            out.push((Tok::Ident(name, primes), s));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{ch}`") });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

#[derive(Clone, Debug)]
enum Expr {
    Num(BigInt),
    I,
    Ident { name: String, primes: u32, pos: usize },
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, i64, usize),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.to_string() })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            let (_, pos) = self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(c, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            let (_, pos) = self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(c, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        let (_, pos) = self.bump();
        let paren = *self.peek() == Tok::Op('(');
        if paren {
            self.bump();
        }
        let neg = *self.peek() == Tok::Op('-');
        if neg {
            self.bump();
        }
        let e = match self.bump() {
            (Tok::Int(n), p) => i64::try_from(n).map_err(|_| Error::Syntax { pos: p, msg: "exponent too large".into() })?,
            (_, p) => return Err(Error::Syntax { pos: p, msg: "expected an integer exponent".into() }),
        };
        if paren {
            if *self.peek() != Tok::Op(')') {
                return self.err("expected `)`");
            }
            self.bump();
        }
        if *self.peek() == Tok::Op('^') {
            return self.err("chained exponents need parentheses");
        }
        Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }, pos))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            (Tok::Int(n), _) => Ok(Expr::Num(n)),
            (Tok::Ident(name, 0), _) if name == "i" => Ok(Expr::I),
            (Tok::Ident(name, primes), pos) => Ok(Expr::Ident { name, primes, pos }),
            (Tok::Op('('), _) => {
                let e = self.expr()?;
                if *self.peek() != Tok::Op(')') {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(e)
            }
            (Tok::End, p) => Err(Error::Syntax { pos: p, msg: "unexpected end of expression".into() }),
            (_, p) => Err(Error::Syntax { pos: p, msg: "expected a number, identifier or `(`".into() }),
        }
    }
}

fn parse_ast(src: &str) -> Result<Expr> {
    let mut p = Parser { toks: tokenize(src)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

fn int_scalar(n: &BigInt) -> GaussianRational {
    GaussianRational::real(BigRational::from_integer(n.clone()))
}

fn eval_rf(e: &Expr, var: &mut Option<String>) -> Result<RF> {
    Ok(match e {
        Expr::Num(n) => RF::constant(int_scalar(n)),
        Expr::I => RF::constant(GaussianRational::i()),
        Expr::Ident { name, primes, pos } => {
            if *primes > 0 {
                return Err(Error::Syntax { pos: *pos, msg: "derivative marks are not allowed here".into() });
            }
            match var {
                Some(v) if v != name => {
                    return Err(Error::Syntax { pos: *pos, msg: format!("unknown identifier `{name}` (variable is `{v}`)") })
                }
                Some(_) => {}
                None => *var = Some(name.clone()),
            }
            RF::var(name.as_str())
        }
        Expr::Neg(a) => -eval_rf(a, var)?,
        Expr::Bin(op, a, b, pos) => {
            let (a, b) = (eval_rf(a, var)?, eval_rf(b, var)?);
            match op {
                '+' => &a + &b,
                '-' => &a - &b,
                '*' => &a * &b,
                _ => &a * &b.inv().map_err(|_| Error::DivisionByZeroExpression { pos: *pos })?,
            }
        }
        Expr::Pow(a, k, pos) => eval_rf(a, var)?.pow(*k).map_err(|_| Error::DivisionByZeroExpression { pos: *pos })?,
    })
}

/// Parse a rational function in a single variable, which is inferred.
pub fn parse_expression(src: &str) -> Result<RF> {
    let mut var = None;
    let r = eval_rf(&parse_ast(src)?, &mut var)?;
    Ok(match var {
        Some(v) => r.with_var(v),
        None => r,
    })
}

/// Parse a rational function in `var`; any other identifier is an error.
pub fn parse_expression_in(src: &str, var: &str) -> Result<RF> {
    let mut v = Some(var.to_string());
    Ok(eval_rf(&parse_ast(src)?, &mut v)?.with_var(var))
}

fn eval_dp(e: &Expr, var_of: &dyn Fn(&str) -> String) -> Result<DP> {
    Ok(match e {
        Expr::Num(n) => DP::constant(int_scalar(n)),
        Expr::I => DP::constant(GaussianRational::i()),
        Expr::Ident { name, primes, .. } => DP::symbol(&DiffSymbol::even(name, &var_of(name)).nth(*primes)),
        Expr::Neg(a) => -eval_dp(a, var_of)?,
        Expr::Bin(op, a, b, pos) => {
            let (a, b) = (eval_dp(a, var_of)?, eval_dp(b, var_of)?);
            match op {
                '+' => &a + &b,
                '-' => &a - &b,
                '*' => &a * &b,
                _ => {
                    let c = b
                        .as_constant()
                        .ok_or_else(|| Error::Syntax { pos: *pos, msg: "division by a non-constant".into() })?;
                    let inv = c.checked_inv().ok_or(Error::DivisionByZeroExpression { pos: *pos })?;
                    a.scale(&inv)
                }
            }
        }
        Expr::Pow(a, k, pos) => {
            let a = eval_dp(a, var_of)?;
            if *k >= 0 {
                a.pow(*k as u32)
            } else {
                let c = a
                    .as_constant()
                    .ok_or_else(|| Error::Syntax { pos: *pos, msg: "negative power of a non-constant".into() })?;
                let inv = c.checked_inv().ok_or(Error::DivisionByZeroExpression { pos: *pos })?;
                DP::constant(inv.pow((-*k) as u32))
            }
        }
    })
}

/// Parse a differential polynomial with even symbols; `f'` is the first
/// derivative of `f`. `var_of` assigns each symbol name its coordinate.
pub fn parse_differential(src: &str, var_of: &dyn Fn(&str) -> String) -> Result<DP> {
    eval_dp(&parse_ast(src)?, var_of)
}

fn with_context(e: Error, ctx: &str) -> Error {
    match e {
        Error::Syntax { pos, msg } => Error::Syntax { pos, msg: format!("{ctx}: {msg}") },
        Error::Load(m) => Error::Load(format!("{ctx}: {m}")),
        other => other,
    }
}

// ------------------------------------------------------------------ documents

/// Raw document: every expression still a string. This is also the JSON
/// form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
    #[serde(default)]
    pub charts: Vec<RawChart>,
    #[serde(default)]
    pub pairs: Vec<RawPair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cochains: Vec<RawCochain>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub splittings: Vec<RawSplitting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construct: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChart {
    pub name: String,
    pub var: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPair {
    pub source: String,
    pub target: String,
    pub entries: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    #[default]
    Target,
    Leading,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCochain {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<i64>,
    pub degree: usize,
    #[serde(default)]
    pub frame: Frame,
    /// Keys are chart names separated by spaces, e.g. `"U V"`.
    pub values: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSplitting {
    pub chart: String,
    pub entries: BTreeMap<String, String>,
}

fn load_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Load(format!("line {line}: {}", msg.into())))
}

enum Block {
    None,
    Pair(RawPair),
    Cochain(RawCochain),
    Splitting(RawSplitting),
}

fn insert_unique(map: &mut BTreeMap<String, String>, key: String, value: String, line: usize) -> Result<()> {
    if map.contains_key(&key) {
        return load_err(line, format!("duplicate key `{key}`"));
    }
    map.insert(key, value);
    Ok(())
}

/// Parse the line-oriented text format into a [`RawDocument`].
pub fn parse_text(src: &str) -> Result<RawDocument> {
    let mut doc = RawDocument::default();
    let mut block = Block::None;
    for (idx, raw) in src.lines().enumerate() {
        let ln = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if !matches!(block, Block::None) {
            if line == "end" {
                match std::mem::replace(&mut block, Block::None) {
                    Block::Pair(p) => doc.pairs.push(p),
                    Block::Cochain(c) => doc.cochains.push(c),
                    Block::Splitting(s) => doc.splittings.push(s),
                    Block::None => unreachable!(),
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return load_err(ln, "expected `key = expression` or `end`");
            };
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if key.is_empty() || value.is_empty() {
                return load_err(ln, "empty key or expression");
            }
            match &mut block {
                Block::Pair(p) => insert_unique(&mut p.entries, key, value, ln)?,
                Block::Cochain(c) => {
                    let key = key.split_whitespace().collect::<Vec<_>>().join(" ");
                    insert_unique(&mut c.values, key, value, ln)?
                }
                Block::Splitting(s) => insert_unique(&mut s.entries, key, value, ln)?,
                Block::None => unreachable!(),
            }
            continue;
        }
        match words.as_slice() {
            ["order", n] => {
                let n = n.parse().or_else(|_| load_err(ln, "order must be a non-negative integer"))?;
                if doc.order.replace(n).is_some() {
                    return load_err(ln, "order given twice");
                }
            }
            ["genus", g] => {
                let g = g.parse().or_else(|_| load_err(ln, "genus must be a non-negative integer"))?;
                if doc.genus.replace(g).is_some() {
                    return load_err(ln, "genus given twice");
                }
            }
            ["chart", name, var] => doc.charts.push(RawChart { name: name.to_string(), var: var.to_string() }),
            ["pair", u, v] => {
                block = Block::Pair(RawPair { source: u.to_string(), target: v.to_string(), entries: BTreeMap::new() })
            }
            ["splitting", u] => block = Block::Splitting(RawSplitting { chart: u.to_string(), entries: BTreeMap::new() }),
            ["cochain", name, rest @ ..] => {
                let mut c = RawCochain {
                    name: name.to_string(),
                    weight: None,
                    degree: usize::MAX,
                    frame: Frame::Target,
                    values: BTreeMap::new(),
                };
                if rest.len() % 2 != 0 {
                    return load_err(ln, "cochain options come in `key value` pairs");
                }
                for kv in rest.chunks(2) {
                    match kv[0] {
                        "weight" => c.weight = Some(kv[1].parse().or_else(|_| load_err(ln, "weight must be an integer"))?),
                        "degree" => c.degree = kv[1].parse().or_else(|_| load_err(ln, "degree must be 0, 1 or 2"))?,
                        "frame" => {
                            c.frame = match kv[1] {
                                "target" => Frame::Target,
                                "leading" => Frame::Leading,
                                other => return load_err(ln, format!("unknown frame `{other}`")),
                            }
                        }
                        other => return load_err(ln, format!("unknown cochain option `{other}`")),
                    }
                }
                if c.degree == usize::MAX {
                    return load_err(ln, "cochain needs `degree`");
                }
                block = Block::Cochain(c);
            }
            ["construct", "theta", "=", name] => {
                if doc.construct.replace(name.to_string()).is_some() {
                    return load_err(ln, "construct given twice");
                }
            }
            ["twist", "g12", "=", name] => {
                if doc.twist.replace(name.to_string()).is_some() {
                    return load_err(ln, "twist given twice");
                }
            }
            _ => return load_err(ln, format!("unrecognized line `{line}`")),
        }
    }
    if !matches!(block, Block::None) {
        return Err(Error::Load("unterminated block: missing `end`".into()));
    }
    Ok(doc)
}

/// Parse either format; JSON is recognized by a leading `{`.
pub fn parse_raw(src: &str) -> Result<RawDocument> {
    if src.trim_start().starts_with('{') {
        serde_json::from_str(src).map_err(|e| Error::Load(format!("json: {e}")))
    } else {
        parse_text(src)
    }
}

/// A cochain section with parsed values.
#[derive(Clone, Debug, PartialEq)]
pub struct DocCochain {
    pub name: String,
    pub weight: Option<i64>,
    pub degree: usize,
    pub frame: Frame,
    pub values: BTreeMap<Vec<String>, RF>,
}

impl DocCochain {
    /// Target-frame cochain of the given weight. A declared weight must agree.
    pub fn to_atlas_cochain(&self, weight: i64) -> Result<AtlasCochain> {
        if let Some(w) = self.weight {
            if w != weight {
                return Err(Error::Load(format!("cochain {} has weight {w}, expected {weight}", self.name)));
            }
        }
        match self.frame {
            Frame::Target => Ok(AtlasCochain { weight, degree: self.degree, values: self.values.clone() }),
            Frame::Leading => {
                let c = self.to_cech(self.bundle(weight))?;
                crate::cech::to_target(&c, weight)
            }
        }
    }

    /// The model bundle of twist `k` on the cover spanned by this cochain.
    pub fn bundle(&self, k: i64) -> LineBundleModel {
        if self.values.keys().flatten().any(|c| c == "W") {
            LineBundleModel::three_chart(k)
        } else {
            LineBundleModel::new(k)
        }
    }

    /// Leading-frame Čech cochain on a model cover.
    pub fn to_cech(&self, bundle: LineBundleModel) -> Result<CechCochain> {
        match self.frame {
            Frame::Leading => {
                let mut c = CechCochain::zero(self.degree, bundle);
                for (k, v) in &self.values {
                    let keys: Vec<&str> = k.iter().map(|s| s.as_str()).collect();
                    c.set(&keys, v.clone())?;
                }
                Ok(c)
            }
            Frame::Target => {
                let w = self.weight.unwrap_or(bundle.k);
                to_leading(&AtlasCochain { weight: w, degree: self.degree, values: self.values.clone() }, bundle)
            }
        }
    }
}

/// A loaded document. `atlas` is the atlas spelled out by the pair
/// sections, before any `construct` or `twist` directive.
#[derive(Clone, Debug)]
pub struct AtlasDocument {
    pub charts: Vec<(String, String)>,
    pub atlas: Option<Atlas>,
    pub cochains: Vec<DocCochain>,
    pub splitting: Option<SplittingMap>,
    pub construct: Option<String>,
    pub twist: Option<String>,
}

impl AtlasDocument {
    pub fn cochain(&self, name: &str) -> Result<&DocCochain> {
        self.cochains
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Load(format!("no cochain named `{name}`")))
    }

    pub fn base_atlas(&self) -> Result<&Atlas> {
        self.atlas.as_ref().ok_or_else(|| Error::Load("document has no pair sections".into()))
    }

    /// Atlas from the `construct` directive applied to the base atlas.
    pub fn construction(&self) -> Result<Atlas> {
        let name = self.construct.as_deref().ok_or_else(|| Error::Load("no `construct` directive".into()))?;
        build_construction(self.base_atlas()?, &self.cochain(name)?.to_atlas_cochain(1)?)
    }

    /// The base atlas (or the construction, if directed) with the `twist`
    /// directive applied.
    pub fn twisted(&self) -> Result<Atlas> {
        let name = self.twist.as_deref().ok_or_else(|| Error::Load("no `twist` directive".into()))?;
        let base = match self.construct {
            Some(_) => self.construction()?,
            None => self.base_atlas()?.clone(),
        };
        twist_by_g12(&base, &self.cochain(name)?.to_atlas_cochain(2)?)
    }

    /// The atlas the document describes, with directives applied in order
    /// `construct` then `twist`.
    pub fn resolve(&self) -> Result<Atlas> {
        match (&self.construct, &self.twist) {
            (_, Some(_)) => self.twisted(),
            (Some(_), None) => self.construction(),
            (None, None) => Ok(self.base_atlas()?.clone()),
        }
    }
}

/// `(plus?, monomial)` for an entry key.
fn entry_slot(key: &str, n: usize) -> Result<(bool, OddMonomial, bool)> {
    let named = match key {
        "f" => Some((true, OddMonomial::ONE)),
        "zeta" => Some((false, OddMonomial::THETA)),
        "g12" => Some((true, OddMonomial::xis(&[1, 2]))),
        "zeta12" => Some((false, OddMonomial::xis(&[1, 2]).with_theta())),
        _ => None,
    };
    if let Some((plus, m)) = named {
        return check_slot(key, plus, m, false, n);
    }
    for (prefix, plus, theta) in [("f", true, true), ("psi", false, false)] {
        if let Some(i) = key.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok()) {
            if (1..=30).contains(&i) {
                let m = OddMonomial::xis(&[i]);
                return check_slot(key, plus, if theta { m.with_theta() } else { m }, false, n);
            }
        }
    }
    let (plus, mon) = if let Some(m) = key.strip_prefix("plus:") {
        (true, m)
    } else if let Some(m) = key.strip_prefix("minus:") {
        (false, m)
    } else {
        return Err(Error::Load(format!("unknown entry key `{key}`")));
    };
    let (m, neg) = parse_monomial(mon).map_err(|e| with_context(e, key))?;
    check_slot(key, plus, m, neg, n)
}

fn check_slot(key: &str, plus: bool, m: OddMonomial, neg: bool, n: usize) -> Result<(bool, OddMonomial, bool)> {
    if m.xi_indices().iter().any(|&i| i > n) {
        return Err(Error::Load(format!("entry `{key}` uses a generator beyond order {n}")));
    }
    let want = if plus { Parity::Even } else { Parity::Odd };
    if m.parity() != want {
        return Err(Error::Load(format!("entry `{key}` has the wrong parity")));
    }
    Ok((plus, m, neg))
}

/// `xi1*xi2*theta`, `theta`, `1`; the sign of reordering is returned.
fn parse_monomial(s: &str) -> Result<(OddMonomial, bool)> {
    let s = s.trim();
    if s == "1" {
        return Ok((OddMonomial::ONE, false));
    }
    let mut idx = Vec::new();
    let mut theta_at = None;
    for (k, part) in s.split('*').map(str::trim).enumerate() {
        if part == "theta" {
            if theta_at.replace(k).is_some() {
                return Err(Error::Load("repeated theta".into()));
            }
        } else if let Some(i) = part.strip_prefix("xi").and_then(|d| d.parse::<usize>().ok()) {
            if !(1..=30).contains(&i) || idx.contains(&i) {
                return Err(Error::Load(format!("bad generator `{part}`")));
            }
            idx.push(i);
        } else {
            return Err(Error::Load(format!("bad monomial factor `{part}`")));
        }
    }
    let (m, mut neg) = OddMonomial::xi(&idx);
    if let Some(k) = theta_at {
        // Moving θ to the end passes the ξ's written after it.
        neg ^= (s.split('*').count() - 1 - k) % 2 == 1;
        return Ok((m.with_theta(), neg));
    }
    Ok((m, neg))
}

fn parse_in(src: &str, var: &str, ctx: &str) -> Result<RF> {
    parse_expression_in(src, var).map_err(|e| with_context(e, ctx))
}

fn model_var(chart: &str) -> Option<&'static str> {
    match chart {
        "U" => Some("x"),
        "V" => Some("y"),
        "W" => Some("z"),
        _ => None,
    }
}

/// Compile a raw document: parse every expression and build the atlas.
pub fn compile(raw: &RawDocument) -> Result<AtlasDocument> {
    let charts: Vec<(String, String)> = raw.charts.iter().map(|c| (c.name.clone(), c.var.clone())).collect();
    let var_of = |chart: &str| -> Result<String> {
        if charts.is_empty() {
            return model_var(chart)
                .map(String::from)
                .ok_or_else(|| Error::ChartMismatch(format!("undeclared chart `{chart}`")));
        }
        charts
            .iter()
            .find(|(n, _)| n == chart)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::ChartMismatch(format!("undeclared chart `{chart}`")))
    };

    let atlas = if raw.pairs.is_empty() {
        None
    } else {
        let n = raw.order.ok_or_else(|| Error::Load("atlas needs an `order` line".into()))?;
        let names: Vec<(&str, &str)> = charts.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let pairs: Vec<(&str, &str)> = raw.pairs.iter().map(|p| (p.source.as_str(), p.target.as_str())).collect();
        let mut triples = Vec::new();
        for (i, a) in names.iter().enumerate() {
            for (j, b) in names.iter().enumerate().skip(i + 1) {
                for c in names.iter().skip(j + 1) {
                    let linked = |u: &str, v: &str| pairs.iter().any(|&(p, q)| (p, q) == (u, v) || (p, q) == (v, u));
                    if linked(a.0, b.0) && linked(b.0, c.0) && linked(a.0, c.0) {
                        triples.push((a.0, b.0, c.0));
                    }
                }
            }
        }
        let cover = Cover::new(&names, &pairs, &triples)?;
        let mut ts = Vec::new();
        for p in &raw.pairs {
            ts.push(compile_pair(p, n, &var_of(&p.source)?, &var_of(&p.target)?)?);
        }
        Some(Atlas::new(cover, n, ts, raw.genus)?)
    };

    let mut cochains = Vec::new();
    for c in &raw.cochains {
        if c.degree > 2 {
            return Err(Error::Load(format!("cochain {}: degree must be 0, 1 or 2", c.name)));
        }
        let mut values = BTreeMap::new();
        for (k, v) in &c.values {
            let key: Vec<String> = k.split_whitespace().map(String::from).collect();
            if key.len() != c.degree + 1 {
                return Err(Error::Load(format!("cochain {}: key `{k}` needs {} charts", c.name, c.degree + 1)));
            }
            let val = parse_in(v, &var_of(&key[0])?, &format!("cochain {} [{k}]", c.name))?;
            values.insert(key, val);
        }
        cochains.push(DocCochain { name: c.name.clone(), weight: c.weight, degree: c.degree, frame: c.frame, values });
    }

    let splitting = if raw.splittings.is_empty() {
        None
    } else {
        let mut map = BTreeMap::new();
        for s in &raw.splittings {
            let var = var_of(&s.chart)?;
            let mut cs = ChartSplitting::identity();
            for (k, v) in &s.entries {
                let val = parse_in(v, &var, &format!("splitting {} [{k}]", s.chart))?;
                let slot = match k.as_str() {
                    "lambda1" => &mut cs.lambda1,
                    "lambda2" => &mut cs.lambda2,
                    "lambda12" => &mut cs.lambda12,
                    "phi1" => &mut cs.phi1,
                    "phi2" => &mut cs.phi2,
                    "phi12" => &mut cs.phi12,
                    other => return Err(Error::Load(format!("splitting {}: unknown key `{other}`", s.chart))),
                };
                *slot = val;
            }
            if map.insert(s.chart.clone(), cs).is_some() {
                return Err(Error::Load(format!("splitting {} given twice", s.chart)));
            }
        }
        for (name, _) in &charts {
            map.entry(name.clone()).or_insert_with(ChartSplitting::identity);
        }
        Some(SplittingMap { charts: map })
    };

    for name in raw.construct.iter().chain(raw.twist.iter()) {
        if !cochains.iter().any(|c| &c.name == name) {
            return Err(Error::Load(format!("directive refers to unknown cochain `{name}`")));
        }
    }
    Ok(AtlasDocument { charts, atlas, cochains, splitting, construct: raw.construct.clone(), twist: raw.twist.clone() })
}

fn compile_pair(p: &RawPair, n: usize, var: &str, target_var: &str) -> Result<Transition> {
    let ctx = format!("pair {} {}", p.source, p.target);
    for required in ["f", "zeta"] {
        if !p.entries.contains_key(required) {
            return Err(Error::Load(format!("{ctx}: missing `{required}`")));
        }
    }
    let mut plus = Superfield::zero(&p.source, n, Parity::Even);
    let mut minus = Superfield::zero(&p.source, n, Parity::Odd);
    let mut seen = Vec::new();
    for (k, v) in &p.entries {
        let (is_plus, m, neg) = entry_slot(k, n).map_err(|e| with_context(e, &ctx))?;
        let slot = (is_plus, m);
        if seen.contains(&slot) {
            return Err(Error::Load(format!("{ctx}: `{k}` duplicates another entry")));
        }
        seen.push(slot);
        let mut val = parse_in(v, var, &format!("{ctx} [{k}]"))?;
        if neg {
            val = -val;
        }
        if is_plus {
            plus.set(m, val)?;
        } else {
            minus.set(m, val)?;
        }
    }
    Supermorphism::new((&p.source, var), (&p.target, target_var), plus, minus).map_err(|e| with_context(e, &ctx))
}

/// Read and compile a document from text.
pub fn load_document_str(src: &str) -> Result<AtlasDocument> {
    compile(&parse_raw(src)?)
}

pub fn load_document(path: &std::path::Path) -> Result<AtlasDocument> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    load_document_str(&src)
}

/// Load a file and return the atlas it describes, directives applied.
pub fn load_atlas(path: &std::path::Path) -> Result<Atlas> {
    load_document(path)?.resolve()
}

// ------------------------------------------------------------------- writing

fn entry_key(plus: bool, m: OddMonomial) -> String {
    let idx = m.xi_indices();
    match (plus, idx.as_slice(), m.has_theta()) {
        (true, [], false) => "f".into(),
        (false, [], true) => "zeta".into(),
        (true, [i], true) => format!("f{i}"),
        (false, [i], false) => format!("psi{i}"),
        (true, [1, 2], false) => "g12".into(),
        (false, [1, 2], true) => "zeta12".into(),
        _ => format!("{}:{}", if plus { "plus" } else { "minus" }, m.render()),
    }
}

/// Raw form of an atlas: charts, order, genus and the forward transitions.
pub fn atlas_to_raw(a: &Atlas) -> RawDocument {
    let charts = a.cover().charts().iter().map(|c| RawChart { name: c.name.clone(), var: c.var.clone() }).collect();
    let pairs = a
        .forward_transitions()
        .iter()
        .map(|t| {
            let mut entries = BTreeMap::new();
            for (plus, sf) in [(true, t.plus()), (false, t.minus())] {
                for (m, c) in sf.coefficients() {
                    if !c.is_zero() || m == OddMonomial::ONE {
                        entries.insert(entry_key(plus, m), c.render());
                    }
                }
            }
            RawPair { source: t.source().into(), target: t.target().into(), entries }
        })
        .collect();
    RawDocument { order: Some(a.order()), genus: a.genus(), charts, pairs, ..RawDocument::default() }
}

fn ordered(m: &BTreeMap<String, String>) -> Vec<(&String, &String)> {
    let rank = |k: &str| match k {
        "f" => 0,
        "zeta" => 1,
        _ => 2,
    };
    let mut v: Vec<(&String, &String)> = m.iter().collect();
    v.sort_by_key(|(k, _)| (rank(k), k.as_str()));
    v
}

/// Render a raw document in the text format.
pub fn render_text(doc: &RawDocument) -> String {
    let mut s = String::new();
    if let Some(n) = doc.order {
        s.push_str(&format!("order {n}\n"));
    }
    if let Some(g) = doc.genus {
        s.push_str(&format!("genus {g}\n"));
    }
    for c in &doc.charts {
        s.push_str(&format!("chart {} {}\n", c.name, c.var));
    }
    for p in &doc.pairs {
        s.push_str(&format!("\npair {} {}\n", p.source, p.target));
        for (k, v) in ordered(&p.entries) {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        s.push_str("end\n");
    }
    for c in &doc.cochains {
        s.push_str(&format!("\ncochain {}", c.name));
        if let Some(w) = c.weight {
            s.push_str(&format!(" weight {w}"));
        }
        let frame = match c.frame {
            Frame::Target => "target",
            Frame::Leading => "leading",
        };
        s.push_str(&format!(" degree {} frame {frame}\n", c.degree));
        for (k, v) in &c.values {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        s.push_str("end\n");
    }
    for sp in &doc.splittings {
        s.push_str(&format!("\nsplitting {}\n", sp.chart));
        for (k, v) in &sp.entries {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        s.push_str("end\n");
    }
    if let Some(t) = &doc.construct {
        s.push_str(&format!("\nconstruct theta = {t}\n"));
    }
    if let Some(t) = &doc.twist {
        s.push_str(&format!("twist g12 = {t}\n"));
    }
    s
}

/// Text rendering of an atlas.
pub fn render_atlas(a: &Atlas) -> String {
    render_text(&atlas_to_raw(a))
}

/// Raw splitting sections for a splitting map.
pub fn splitting_to_raw(s: &SplittingMap) -> Vec<RawSplitting> {
    s.charts
        .iter()
        .map(|(chart, c)| {
            let mut entries = BTreeMap::new();
            for (k, v) in [
                ("lambda1", &c.lambda1),
                ("lambda2", &c.lambda2),
                ("lambda12", &c.lambda12),
                ("phi1", &c.phi1),
                ("phi2", &c.phi2),
                ("phi12", &c.phi12),
            ] {
                if !v.is_zero() {
                    entries.insert(k.to_string(), v.render());
                }
            }
            RawSplitting { chart: chart.clone(), entries }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let x = RF::var("x");
        assert_eq!(parse_expression("-1/x").unwrap(), &RF::from_int(-1) / &x);
        assert_eq!(parse_expression("(x^2-1)/(x-1)").unwrap(), &x + &RF::one());
        assert!(parse_expression("i^2 + 1").unwrap().is_zero());
        assert_eq!(parse_expression("x^-2").unwrap(), x.pow(-2).unwrap());
        assert_eq!(parse_expression("-x^2").unwrap(), -(&x * &x));
        assert_eq!(parse_expression("2^(-1)").unwrap(), RF::from_ratio(1, 2));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_expression("1/(x-x)"), Err(Error::DivisionByZeroExpression { pos: 1 }));
        assert!(matches!(parse_expression("x + y"), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expression("x +"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expression("(x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("x $ 1"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expression("x^y"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("0^-1"), Err(Error::DivisionByZeroExpression { .. })));
    }

    #[test]
    fn render_round_trip() {
        for src in ["x^2 - 1/2*x", "(3 + 2*i)*x/(x^2 + 1)", "-1/x", "1/(x + 1)", "i*x^3 - 7/3", "(1/2 - 3*i/2)*x"] {
            let f = parse_expression(src).unwrap();
            assert_eq!(parse_expression(&f.render()).unwrap(), f, "{src} -> {}", f.render());
        }
    }

    #[test]
    fn differential_round_trip() {
        let var = |n: &str| if n.starts_with('P') { "y".to_string() } else { "x".to_string() };
        let p = parse_differential("Phi1*phi2_U'*zeta^2 - 1/2*Phi1'' + (1 + i)*zeta", &var).unwrap();
        assert_eq!(parse_differential(&p.render(), &var).unwrap(), p);
    }

    #[test]
    fn monomial_keys() {
        assert_eq!(parse_monomial("theta*xi1").unwrap(), (OddMonomial::xis(&[1]).with_theta(), true));
        assert_eq!(parse_monomial("xi2*xi1").unwrap(), (OddMonomial::xis(&[1, 2]), true));
        assert_eq!(entry_slot("plus:xi1*theta", 2).unwrap(), (true, OddMonomial::xis(&[1]).with_theta(), false));
        assert!(entry_slot("psi3", 2).is_err());
        assert!(entry_slot("plus:xi1", 2).is_err());
    }

    const SPLIT: &str = "order 2\nchart U x\nchart V y\npair U V\n  f = -1/x\n  zeta = 1/x\nend\n";

    #[test]
    fn text_and_json_agree() {
        let doc = load_document_str(SPLIT).unwrap();
        let a = doc.resolve().unwrap();
        let json = serde_json::to_string(&parse_text(SPLIT).unwrap()).unwrap();
        let b = load_document_str(&json).unwrap().resolve().unwrap();
        assert_eq!(render_atlas(&a), render_atlas(&b));
        assert_eq!(render_atlas(&load_document_str(&render_atlas(&a)).unwrap().resolve().unwrap()), render_atlas(&a));
    }

    #[test]
    fn missing_zeta_is_a_load_error() {
        let src = "order 2\nchart U x\nchart V y\npair U V\n  f = -1/x\nend\n";
        assert!(matches!(load_document_str(src), Err(Error::Load(_))));
        let src = "order 2\nchart U x\npair U V\n  f = -1/x\n zeta = 1/x\nend\n";
        assert!(matches!(load_document_str(src), Err(Error::ChartMismatch(_))));
    }
}
