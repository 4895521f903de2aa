//! A small expression language over cube coordinates.
//!
//! Expressions are built from dyadic constants, coordinates `x0, x1, ...`,
//! `neg`, `abs`, `+`, `-`, `*`, `min` and `max`. Everything evaluates exactly
//! on dyadics, so interval enclosures are sound without outward rounding and
//! Lipschitz bounds (max metric on the cube) are derived syntactically.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rand::Rng;
use thiserror::Error;

use crate::dyadic::{Dyadic, DyadicInterval};
use crate::functions::{FunctionObject, ModulusFn};
use crate::names::space_as_name;
use crate::spaces::{cube, reals, unit_interval, Coord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("literal {literal:?} at position {pos} is not a dyadic rational")]
    NonDyadic { pos: usize, literal: String },
    #[error("expression uses coordinate x{needed} but the domain has dimension {dim}")]
    Arity { needed: usize, dim: usize },
    #[error("invalid window: {0}")]
    Window(String),
    #[error("range enclosure {range} exceeds the window {window}")]
    Range { range: String, window: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Dyadic),
    Coord(usize),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl Expr {
    pub fn constant(c: Dyadic) -> Expr {
        Expr::Const(c)
    }

    pub fn coord(i: usize) -> Expr {
        Expr::Coord(i)
    }

    /// Number of coordinates referenced: one past the largest index.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Coord(i) => i + 1,
            Expr::Neg(a) | Expr::Abs(a) => a.arity(),
            Expr::Add(a, c) | Expr::Sub(a, c) | Expr::Mul(a, c) | Expr::Min(a, c) | Expr::Max(a, c) => {
                a.arity().max(c.arity())
            }
        }
    }

    /// Folds negated constants into constants; the parser does the same,
    /// so `parse(print(e)) == canonicalize(e)`.
    pub fn canonicalize(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Coord(_) => self.clone(),
            Expr::Neg(a) => match a.canonicalize() {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(b(other)),
            },
            Expr::Abs(a) => Expr::Abs(b(a.canonicalize())),
            Expr::Add(x, y) => Expr::Add(b(x.canonicalize()), b(y.canonicalize())),
            Expr::Sub(x, y) => Expr::Sub(b(x.canonicalize()), b(y.canonicalize())),
            Expr::Mul(x, y) => Expr::Mul(b(x.canonicalize()), b(y.canonicalize())),
            Expr::Min(x, y) => Expr::Min(b(x.canonicalize()), b(y.canonicalize())),
            Expr::Max(x, y) => Expr::Max(b(x.canonicalize()), b(y.canonicalize())),
        }
    }

    /// Exact value at a point.
    ///
    /// # Panics
    /// If the point has fewer coordinates than [`Expr::arity`].
    pub fn eval_point(&self, x: &[Dyadic]) -> Dyadic {
        match self {
            Expr::Const(c) => c.clone(),
            Expr::Coord(i) => x[*i].clone(),
            Expr::Neg(a) => -a.eval_point(x),
            Expr::Abs(a) => a.eval_point(x).abs(),
            Expr::Add(p, q) => p.eval_point(x) + q.eval_point(x),
            Expr::Sub(p, q) => p.eval_point(x) - q.eval_point(x),
            Expr::Mul(p, q) => p.eval_point(x) * q.eval_point(x),
            Expr::Min(p, q) => p.eval_point(x).min_with(&q.eval_point(x)),
            Expr::Max(p, q) => p.eval_point(x).max_with(&q.eval_point(x)),
        }
    }

    /// Sound enclosure of the range over a box, exact on point boxes.
    ///
    /// # Panics
    /// If the box has fewer coordinates than [`Expr::arity`].
    pub fn eval_interval(&self, bx: &[DyadicInterval]) -> DyadicInterval {
        match self {
            Expr::Const(c) => DyadicInterval::point(c.clone()),
            Expr::Coord(i) => bx[*i].clone(),
            Expr::Neg(a) => a.eval_interval(bx).neg(),
            Expr::Abs(a) => a.eval_interval(bx).abs(),
            Expr::Add(p, q) => p.eval_interval(bx).add(&q.eval_interval(bx)),
            Expr::Sub(p, q) => p.eval_interval(bx).sub(&q.eval_interval(bx)),
            Expr::Mul(p, q) => p.eval_interval(bx).mul(&q.eval_interval(bx)),
            Expr::Min(p, q) => p.eval_interval(bx).min(&q.eval_interval(bx)),
            Expr::Max(p, q) => p.eval_interval(bx).max(&q.eval_interval(bx)),
        }
    }

    /// Lipschitz bound over a box for the max metric on the domain.
    pub fn lipschitz_on(&self, bx: &[DyadicInterval]) -> Dyadic {
        match self {
            Expr::Const(_) => Dyadic::zero(),
            Expr::Coord(_) => Dyadic::one(),
            Expr::Neg(a) | Expr::Abs(a) => a.lipschitz_on(bx),
            Expr::Add(p, q) | Expr::Sub(p, q) => p.lipschitz_on(bx) + q.lipschitz_on(bx),
            Expr::Min(p, q) | Expr::Max(p, q) => p.lipschitz_on(bx).max_with(&q.lipschitz_on(bx)),
            Expr::Mul(p, q) => {
                let (lp, lq) = (p.lipschitz_on(bx), q.lipschitz_on(bx));
                let mut l = Dyadic::zero();
                if !lp.is_zero() {
                    l = l + lp * q.eval_interval(bx).mag();
                }
                if !lq.is_zero() {
                    l = l + lq * p.eval_interval(bx).mag();
                }
                l
            }
        }
    }

    /// Lipschitz bound over the unit cube of dimension `arity()`.
    pub fn lipschitz_bound(&self) -> Dyadic {
        self.lipschitz_on(&unit_box(self.arity().max(1)))
    }

    /// `n -> n + ceil(log2 L)`, a binary modulus of continuity.
    pub fn lipschitz_modulus(&self) -> ModulusFn {
        ModulusFn::from_lipschitz(&self.lipschitz_bound())
    }

    /// Range enclosure over the unit cube.
    pub fn range(&self, dim: usize) -> DyadicInterval {
        self.eval_interval(&unit_box(dim.max(self.arity()).max(1)))
    }
}

/// `[0,1]^d` as a vector of intervals.
pub fn unit_box(d: usize) -> Vec<DyadicInterval> {
    vec![DyadicInterval::unit(); d]
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Coord(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "neg({a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Add(p, q) => write!(f, "({p} + {q})"),
            Expr::Sub(p, q) => write!(f, "({p} - {q})"),
            Expr::Mul(p, q) => write!(f, "({p} * {q})"),
            Expr::Min(p, q) => write!(f, "min({p}, {q})"),
            Expr::Max(p, q) => write!(f, "max({p}, {q})"),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push((start, Tok::Num(chars[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Syntax { pos: i, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(b(lhs), b(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(b(lhs), b(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        while self.eat('*') {
            lhs = Expr::Mul(b(lhs), b(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Sym('-')) => {
                self.at += 1;
                Ok(negate(self.factor()?))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Num(_)) => self.literal(),
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if let Some(idx) =
                    name.strip_prefix('x').filter(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()))
                {
                    return idx
                        .parse()
                        .map(Expr::Coord)
                        .map_err(|_| ExprError::Syntax { pos, msg: format!("bad coordinate {name}") });
                }
                let arity = match name.as_str() {
                    "neg" | "abs" => 1,
                    "min" | "max" => 2,
                    _ => {
                        return Err(ExprError::Syntax {
                            pos,
                            msg: format!("unknown identifier {name:?} (expected x<k>, min, max, abs, neg)"),
                        })
                    }
                };
                self.expect('(')?;
                let a = self.expr()?;
                let e = if arity == 1 {
                    if name == "neg" {
                        negate(a)
                    } else {
                        Expr::Abs(b(a))
                    }
                } else {
                    self.expect(',')?;
                    let c = self.expr()?;
                    if name == "min" {
                        Expr::Min(b(a), b(c))
                    } else {
                        Expr::Max(b(a), b(c))
                    }
                };
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<(usize, String), ExprError> {
        match self.toks.get(self.at).cloned() {
            Some((p, Tok::Num(s))) => {
                self.at += 1;
                Ok((p, s))
            }
            _ => self.err("expected a number"),
        }
    }

    fn literal(&mut self) -> Result<Expr, ExprError> {
        let (pos, head) = self.number()?;
        let mut text = head.clone();
        let mut value = decimal(&head).ok_or(ExprError::Syntax { pos, msg: format!("malformed number {head:?}") })?;
        if self.eat('/') {
            let (p2, den) = self.number()?;
            let mut den_v = integer(&den)
                .ok_or(ExprError::Syntax { pos: p2, msg: format!("denominator {den:?} must be an integer") })?;
            text = format!("{text}/{den}");
            if self.eat('^') {
                let (p3, ex) = self.number()?;
                let k: u32 = ex.parse().ok().filter(|&k| k <= 4096).ok_or(ExprError::Syntax {
                    pos: p3,
                    msg: format!("exponent {ex:?} must be an integer in 0..=4096"),
                })?;
                den_v = Pow::pow(den_v, k);
                text = format!("{text}^{ex}");
            }
            if den_v == BigInt::from(0) {
                return Err(ExprError::Syntax { pos, msg: "zero denominator".into() });
            }
            value /= BigRational::from_integer(den_v);
        }
        Dyadic::from_rational(&value).map(Expr::Const).ok_or(ExprError::NonDyadic { pos, literal: text })
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(-c),
        other => Expr::Neg(b(other)),
    }
}

fn integer(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn decimal(s: &str) -> Option<BigRational> {
    match s.split_once('.') {
        None => integer(s).map(BigRational::from_integer),
        Some((int, frac)) => {
            if (int.is_empty() && frac.is_empty()) || frac.contains('.') {
                return None;
            }
            let whole = if int.is_empty() { BigInt::from(0) } else { integer(int)? };
            let f = if frac.is_empty() { BigInt::from(0) } else { integer(frac)? };
            let scale: BigInt = Pow::pow(BigInt::from(10), frac.len() as u32);
            Some(BigRational::from_integer(whole) + BigRational::new(f, scale))
        }
    }
}

/// Parses the expression grammar; errors carry the character position.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.chars().count() };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// An affine rescaling target `[lo, lo + 2^k]` mapped onto `[0,1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    lo: Dyadic,
    log_width: i64,
}

impl Window {
    /// A window whose width `hi - lo` must be a power of two, so that the
    /// rescaling is exact.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Window, ExprError> {
        let w = &hi - &lo;
        if !w.is_positive() || !w.mantissa().is_one() {
            return Err(ExprError::Window(format!("width {w} of [{lo}, {hi}] is not a positive power of two")));
        }
        Ok(Window { lo, log_width: -w.exponent() })
    }

    pub fn unit() -> Window {
        Window { lo: Dyadic::zero(), log_width: 0 }
    }

    /// A power-of-two window containing `range`, with `lo` on a grid of a
    /// quarter of the width.
    pub fn fit(range: &DyadicInterval) -> Window {
        let w = range.width();
        let mut k = if w.is_zero() { 0 } else { w.log2_ceil().unwrap() };
        loop {
            let lo = range.lo().floor_to(2 - k);
            if range.hi() <= &(&lo + &Dyadic::pow2(-k)) {
                return Window { lo, log_width: k };
            }
            k += 1;
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> Dyadic {
        &self.lo + &self.width()
    }

    pub fn width(&self) -> Dyadic {
        Dyadic::pow2(-self.log_width)
    }

    /// `(v - lo) / width`
    pub fn to_unit(&self, v: &Dyadic) -> Dyadic {
        (v - &self.lo).mul_pow2(-self.log_width)
    }

    /// `lo + t * width`
    pub fn from_unit(&self, t: &Dyadic) -> Dyadic {
        &self.lo + &t.mul_pow2(self.log_width)
    }

    pub fn interval_from_unit(&self, t: &DyadicInterval) -> DyadicInterval {
        DyadicInterval::new(self.from_unit(t.lo()), self.from_unit(t.hi())).expect("monotone map")
    }

    pub fn as_interval(&self) -> DyadicInterval {
        DyadicInterval::new(self.lo.clone(), self.hi()).expect("positive width")
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi())
    }
}

/// The function `x -> (e(x) - lo) / width` from the cube of dimension `dim`
/// (the unit interval when `dim == 1`) into the unit interval.
///
/// The finite map rounds the exact value at the cover point to the codomain
/// level. Rounding costs half a level, so the object's modulus is the
/// Lipschitz modulus of the rescaled map shifted by one.
pub fn to_function(e: &Expr, dim: usize, window: &Window) -> Result<FunctionObject, ExprError> {
    if e.arity() > dim {
        return Err(ExprError::Arity { needed: e.arity() - 1, dim });
    }
    let range = e.range(dim);
    if !window.as_interval().contains_interval(&range) {
        return Err(ExprError::Range { range: range.to_string(), window: window.to_string() });
    }
    let dom = cube(dim);
    let lg = e.lipschitz_on(&unit_box(dim)).mul_pow2(-window.log_width);
    let modulus = match lg.log2_ceil() {
        None => ModulusFn::constant(0),
        Some(k) => ModulusFn::shift(k + 1),
    };
    let codomain = unit_interval();
    let (e1, e2, w1, w2, s, y) = (e.clone(), e.clone(), window.clone(), window.clone(), dom.clone(), codomain.clone());
    Ok(FunctionObject::new(space_as_name(&dom), codomain, modulus, move |n, a| {
        let x = reals(&s.point(a)).expect("cube point");
        y.locate(&[Coord::Real(w1.to_unit(&e1.eval_point(&x)))], n)
    })
    .with_exact(move |p| {
        let x = reals(p).expect("cube point");
        vec![Coord::Real(w2.to_unit(&e2.eval_point(&x)))]
    }))
}

/// A random expression over `dim` coordinates with nesting depth at most
/// `depth`; constants are multiples of `1/8` in `[-2, 2]`.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, dim: usize, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.7) {
            Expr::Coord(rng.gen_range(0..dim.max(1)))
        } else {
            Expr::Const(Dyadic::ratio(rng.gen_range(-16..=16), 3))
        };
    }
    let sub = |rng: &mut R| b(random_expr(rng, dim, depth - 1));
    match rng.gen_range(0..7) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Abs(sub(rng)),
        2 => Expr::Add(sub(rng), sub(rng)),
        3 => Expr::Sub(sub(rng), sub(rng)),
        4 => Expr::Mul(sub(rng), sub(rng)),
        5 => Expr::Min(sub(rng), sub(rng)),
        _ => Expr::Max(sub(rng), sub(rng)),
    }
}
