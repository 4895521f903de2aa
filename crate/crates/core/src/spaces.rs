//! Presented compact metric spaces.
//!
//! A presented space enumerates a dense sequence of points so that the first
//! `2^D(m)` indices form an `m`-covering: closed balls of radius `2^(-m-1)`
//! around them cover the whole space. Indices keep their meaning across
//! levels; an index valid at level `m` is valid at every finer level.
//!
//! Concrete instances: the unit interval, the circle `[0,1) mod 1`, Cantor
//! space with the Baire metric, binary products under the max metric, and
//! cubes built by folding products over the interval.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dyadic::{Dyadic, DyadicInterval};

/// Indices beyond this many bits do not fit the `u64` index type.
pub const MAX_LEVEL_BITS: u32 = 62;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("unknown space identifier {0:?}")]
    UnknownSpace(String),
    #[error("level {level} needs {bits} index bits, more than the supported {MAX_LEVEL_BITS}")]
    LevelTooDeep { level: u32, bits: u32 },
    #[error("point has {got} coordinates, space {space} expects {expected}")]
    Arity { space: String, expected: usize, got: usize },
    #[error("coordinate {0} is not valid for this space")]
    BadCoordinate(String),
    #[error("space mismatch: {0} vs {1}")]
    Mismatch(String, String),
}

/// One coordinate of a point: a real number or a finite binary prefix
/// (an eventually-zero Cantor sequence with trailing zeros dropped).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Coord {
    Real(Dyadic),
    Bits(Vec<bool>),
}

impl Coord {
    pub fn real(&self) -> Option<&Dyadic> {
        match self {
            Coord::Real(d) => Some(d),
            Coord::Bits(_) => None,
        }
    }

    /// Parse `"bits:0101"` as a Cantor coordinate and anything else as a dyadic.
    pub fn parse(s: &str) -> Result<Coord, SpaceError> {
        if let Some(b) = s.trim().strip_prefix("bits:") {
            let mut bits = Vec::with_capacity(b.len());
            for c in b.chars() {
                match c {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(SpaceError::BadCoordinate(s.to_string())),
                }
            }
            return Ok(Coord::Bits(trim_bits(bits)));
        }
        Dyadic::parse(s).map(Coord::Real).map_err(|_| SpaceError::BadCoordinate(s.to_string()))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Real(d) => write!(f, "{d}"),
            Coord::Bits(b) => {
                write!(f, "bits:")?;
                for &x in b {
                    write!(f, "{}", if x { '1' } else { '0' })?;
                }
                Ok(())
            }
        }
    }
}

pub type Point = Vec<Coord>;

/// The real coordinates of a point, if it has no Cantor coordinates.
pub fn reals(p: &[Coord]) -> Option<Vec<Dyadic>> {
    p.iter().map(|c| c.real().cloned()).collect()
}

pub fn real_point(xs: &[Dyadic]) -> Point {
    xs.iter().cloned().map(Coord::Real).collect()
}

fn trim_bits(mut b: Vec<bool>) -> Vec<bool> {
    while b.last() == Some(&false) {
        b.pop();
    }
    b
}

/// Identifier of a space, serialized as `interval`, `circle`, `cantor`,
/// `cube:d` or `product(X,Y)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SpaceId {
    Interval,
    Circle,
    Cantor,
    Cube(usize),
    Product(Box<SpaceId>, Box<SpaceId>),
    Custom(String),
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceId::Interval => write!(f, "interval"),
            SpaceId::Circle => write!(f, "circle"),
            SpaceId::Cantor => write!(f, "cantor"),
            SpaceId::Cube(d) => write!(f, "cube:{d}"),
            SpaceId::Product(a, b) => write!(f, "product({a},{b})"),
            SpaceId::Custom(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for SpaceId {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || SpaceError::UnknownSpace(s.to_string());
        match t {
            "interval" => return Ok(SpaceId::Interval),
            "circle" => return Ok(SpaceId::Circle),
            "cantor" => return Ok(SpaceId::Cantor),
            _ => {}
        }
        if let Some(d) = t.strip_prefix("cube:") {
            let d: usize = d.parse().map_err(|_| bad())?;
            return if d >= 1 { Ok(SpaceId::Cube(d)) } else { Err(bad()) };
        }
        let inner = t.strip_prefix("product(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        // split at the top-level comma
        let mut depth = 0i32;
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    let a: SpaceId = inner[..i].parse()?;
                    let b: SpaceId = inner[i + 1..].parse()?;
                    return Ok(SpaceId::Product(Box::new(a), Box::new(b)));
                }
                _ => {}
            }
        }
        Err(bad())
    }
}

impl Serialize for SpaceId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpaceId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl SpaceId {
    pub fn build(&self) -> Result<PresentedSpace, SpaceError> {
        Ok(match self {
            SpaceId::Interval => unit_interval(),
            SpaceId::Circle => circle(),
            SpaceId::Cantor => cantor(),
            SpaceId::Cube(d) => cube(*d),
            SpaceId::Product(a, b) => product(&a.build()?, &b.build()?),
            SpaceId::Custom(s) => return Err(SpaceError::UnknownSpace(s.clone())),
        })
    }
}

/// The behaviour of a presented space. Implementations must keep
/// `level_bits` strictly increasing and `round(u, m)` inside level `m`.
pub trait Presentation: Send + Sync + fmt::Debug {
    fn id(&self) -> SpaceId;

    /// `D(m)`: level `m` consists of the indices `0 .. 2^D(m)`.
    fn level_bits(&self, m: u32) -> u32;

    /// Number of coordinates in a point of this space.
    fn arity(&self) -> usize;

    fn point(&self, u: u64) -> Point;

    /// Exact distance between two points of this space.
    fn distance(&self, p: &[Coord], q: &[Coord]) -> Dyadic;

    /// A level-`m` index within `2^(-m-1)` of index `u`.
    fn round(&self, u: u64, m: u32) -> u64;

    /// A level-`m` index nearest to the arbitrary point `p`.
    fn locate(&self, p: &[Coord], m: u32) -> u64;

    /// Level-`m` indices whose points lie within distance `r` of `p`.
    fn ball(&self, p: &[Coord], r: &Dyadic, m: u32) -> Vec<u64>;

    /// Level-`m` indices within distance `r` of the coordinate box
    /// `[lo, hi]`, for spaces with real coordinates.
    fn box_query(&self, _lo: &[Dyadic], _hi: &[Dyadic], _r: &Dyadic, _m: u32) -> Option<Vec<u64>> {
        None
    }

    /// Declared separation exponent: distinct level-`m` points are at
    /// least `2^(-eta(m))` apart.
    fn separation(&self, _m: u32) -> Option<u32> {
        None
    }

    fn diameter(&self) -> Dyadic {
        Dyadic::one()
    }

    /// The indices actually present at level `m`. All built-in spaces are
    /// total, so this is the full range unless overridden.
    fn enumerate(&self, m: u32) -> Vec<u64> {
        (0..level_count_of(self, m)).collect()
    }

    /// Points used by covering checks at the given probe level.
    fn probe_points(&self, level: u32) -> Vec<Point> {
        (0..level_count_of(self, level)).map(|u| self.point(u)).collect()
    }

    fn factors(&self) -> Option<(PresentedSpace, PresentedSpace)> {
        None
    }
}

fn level_count_of<P: Presentation + ?Sized>(s: &P, m: u32) -> u64 {
    let bits = s.level_bits(m);
    assert!(bits <= MAX_LEVEL_BITS, "level {m} needs {bits} index bits");
    1u64 << bits
}

/// Shared handle to a presented space.
#[derive(Clone, Debug)]
pub struct PresentedSpace(Arc<dyn Presentation>);

impl Deref for PresentedSpace {
    type Target = dyn Presentation;
    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl PartialEq for PresentedSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.id() == other.id()
    }
}

impl PresentedSpace {
    pub fn new<P: Presentation + 'static>(p: P) -> Self {
        PresentedSpace(Arc::new(p))
    }

    pub fn level_count(&self, m: u32) -> u64 {
        level_count_of(&*self.0, m)
    }

    pub fn checked_level_count(&self, m: u32) -> Result<u64, SpaceError> {
        let bits = self.level_bits(m);
        if bits > MAX_LEVEL_BITS {
            return Err(SpaceError::LevelTooDeep { level: m, bits });
        }
        Ok(1u64 << bits)
    }

    /// The first level containing index `u`.
    pub fn level_of(&self, u: u64) -> u32 {
        let mut m = 0;
        while self.level_bits(m) < 64 && (u >> self.level_bits(m)) != 0 {
            m += 1;
        }
        m
    }

    pub fn index_distance(&self, u: u64, v: u64) -> Dyadic {
        self.distance(&self.point(u), &self.point(v))
    }

    /// Enclosure of `d(xi(u), xi(v))` of width at most `2^(-k)`. Distances
    /// in the built-in spaces are exact dyadics, so the interval is a point.
    pub fn distance_enclosure(&self, u: u64, v: u64, _k: u32) -> DyadicInterval {
        DyadicInterval::point(self.index_distance(u, v))
    }

    pub fn check_arity(&self, p: &[Coord]) -> Result<(), SpaceError> {
        if p.len() != self.arity() {
            return Err(SpaceError::Arity { space: self.id().to_string(), expected: self.arity(), got: p.len() });
        }
        let ok = match self.id() {
            SpaceId::Cantor => matches!(p[0], Coord::Bits(_)),
            _ if self.factors().is_none() => matches!(p[0], Coord::Real(_)),
            _ => true,
        };
        if !ok {
            return Err(SpaceError::BadCoordinate(p[0].to_string()));
        }
        Ok(())
    }

    pub fn same_as(&self, other: &PresentedSpace) -> Result<(), SpaceError> {
        if self == other {
            Ok(())
        } else {
            Err(SpaceError::Mismatch(self.id().to_string(), other.id().to_string()))
        }
    }
}

fn floor_log2(u: u64) -> u32 {
    63 - u.leading_zeros()
}

/// The interval/circle enumeration: index 0 is the point 0 and index
/// `a + 2^j` (with `a < 2^j`) is `(2a+1)/2^(j+1)`.
fn rho(u: u64) -> Dyadic {
    if u == 0 {
        return Dyadic::zero();
    }
    let j = floor_log2(u);
    let a = u - (1u64 << j);
    Dyadic::ratio((2 * a + 1) as i64, j as i64 + 1)
}

/// Inverse of [`rho`] on the grid point `k / 2^bits`, `0 <= k < 2^bits`.
fn rho_index(k: u64, bits: u32) -> u64 {
    if k == 0 {
        return 0;
    }
    let tz = k.trailing_zeros();
    let odd = k >> tz;
    let j = bits - tz - 1;
    (odd - 1) / 2 + (1u64 << j)
}

fn grid_k(x: &Dyadic, bits: u32) -> Option<u64> {
    x.scaled_int(bits as i64).and_then(|k| u64::try_from(k).ok())
}

fn as_real(p: &[Coord]) -> &Dyadic {
    match p.first() {
        Some(Coord::Real(d)) => d,
        other => panic!("expected a real coordinate, got {other:?}"),
    }
}

fn int_range(lo: &Dyadic, hi: &Dyadic, bits: u32) -> (i128, i128) {
    let clamp = |v: num_bigint::BigInt| -> i128 {
        let lim = num_bigint::BigInt::from(i128::MAX / 4);
        if v > lim {
            i128::MAX / 4
        } else if v < -lim.clone() {
            -(i128::MAX / 4)
        } else {
            i128::try_from(v).unwrap()
        }
    };
    (clamp(lo.ceil_scaled(bits as i64)), clamp(hi.floor_scaled(bits as i64)))
}

/// `[0,1]` with the absolute-value metric and `D(m) = m + 1`.
#[derive(Debug, Clone, Copy)]
pub struct UnitInterval;

impl Presentation for UnitInterval {
    fn id(&self) -> SpaceId {
        SpaceId::Interval
    }

    fn level_bits(&self, m: u32) -> u32 {
        m + 1
    }

    fn arity(&self) -> usize {
        1
    }

    fn point(&self, u: u64) -> Point {
        vec![Coord::Real(rho(u))]
    }

    fn distance(&self, p: &[Coord], q: &[Coord]) -> Dyadic {
        (as_real(p) - as_real(q)).abs()
    }

    fn round(&self, u: u64, m: u32) -> u64 {
        if u >> (m + 1) == 0 {
            return u;
        }
        // u = a + 2^(m+n) maps to 2^m + round((2a+1)/2^(n+1) - 1/2), and the
        // rounded quantity is never a tie, so it equals a >> n
        let j = floor_log2(u);
        let n = j - m;
        let a = u - (1u64 << j);
        (1u64 << m) + (a >> n)
    }

    fn locate(&self, p: &[Coord], m: u32) -> u64 {
        let x = as_real(p).max_with(&Dyadic::zero()).min_with(&Dyadic::one());
        let bits = m + 1;
        let k = grid_k(&x.round_to(bits as i64), bits).unwrap_or(0);
        rho_index(k.min((1u64 << bits) - 1), bits)
    }

    fn ball(&self, p: &[Coord], r: &Dyadic, m: u32) -> Vec<u64> {
        let x = as_real(p);
        self.box_query(std::slice::from_ref(x), std::slice::from_ref(x), r, m).unwrap()
    }

    fn box_query(&self, lo: &[Dyadic], hi: &[Dyadic], r: &Dyadic, m: u32) -> Option<Vec<u64>> {
        let bits = m + 1;
        let (a, b) = int_range(&(&lo[0] - r), &(&hi[0] + r), bits);
        let top = (1i128 << bits) - 1;
        let (a, b) = (a.max(0), b.min(top));
        Some((a..=b).map(|k| rho_index(k as u64, bits)).collect())
    }

    fn separation(&self, m: u32) -> Option<u32> {
        Some(m + 1)
    }

    fn probe_points(&self, level: u32) -> Vec<Point> {
        let mut pts: Vec<Point> = (0..1u64 << (level + 1)).map(|u| self.point(u)).collect();
        // the enumeration never reaches the right endpoint
        pts.push(vec![Coord::Real(Dyadic::one())]);
        pts
    }
}

/// `[0,1) mod 1` with the wrap-around metric and `D(m) = m`.
#[derive(Debug, Clone, Copy)]
pub struct Circle;

fn wrap_unit(x: &Dyadic) -> Dyadic {
    let f = Dyadic::new(x.floor_scaled(0), 0);
    x - &f
}

impl Presentation for Circle {
    fn id(&self) -> SpaceId {
        SpaceId::Circle
    }

    fn level_bits(&self, m: u32) -> u32 {
        m
    }

    fn arity(&self) -> usize {
        1
    }

    fn point(&self, u: u64) -> Point {
        vec![Coord::Real(rho(u))]
    }

    fn distance(&self, p: &[Coord], q: &[Coord]) -> Dyadic {
        let d = wrap_unit(&(as_real(p) - as_real(q)));
        d.min_with(&(&Dyadic::one() - &d))
    }

    fn round(&self, u: u64, m: u32) -> u64 {
        if u >> m == 0 {
            return u;
        }
        self.locate(&self.point(u), m)
    }

    fn locate(&self, p: &[Coord], m: u32) -> u64 {
        let x = wrap_unit(as_real(p));
        let k = grid_k(&x.round_to(m as i64), m).unwrap_or(0) & ((1u64 << m) - 1);
        rho_index(k, m)
    }

    fn ball(&self, p: &[Coord], r: &Dyadic, m: u32) -> Vec<u64> {
        let x = as_real(p);
        self.box_query(std::slice::from_ref(x), std::slice::from_ref(x), r, m).unwrap()
    }

    /// Arc query: `[lo, hi]` is read as a non-wrapping arc of `[0,1]`.
    fn box_query(&self, lo: &[Dyadic], hi: &[Dyadic], r: &Dyadic, m: u32) -> Option<Vec<u64>> {
        let n = 1i128 << m;
        let (a, b) = int_range(&(&lo[0] - r), &(&hi[0] + r), m);
        if b - a + 1 >= n {
            return Some((0..n as u64).map(|k| rho_index(k, m)).collect());
        }
        let mut out: Vec<u64> = (a..=b).map(|k| rho_index(k.rem_euclid(n) as u64, m)).collect();
        out.sort_unstable();
        out.dedup();
        Some(out)
    }

    fn separation(&self, m: u32) -> Option<u32> {
        Some(m)
    }

    fn diameter(&self) -> Dyadic {
        Dyadic::ratio(1, 1)
    }
}

/// Cantor space `{0,1}^N` with the metric `2^(-first differing position)`.
/// Index 0 is the all-zero sequence; index `2^L + s` is the `L`-bit binary
/// word of `s` followed by a one and then zeros.
#[derive(Debug, Clone, Copy)]
pub struct Cantor;

fn cantor_bits(u: u64) -> Vec<bool> {
    if u == 0 {
        return Vec::new();
    }
    let l = floor_log2(u);
    let s = u - (1u64 << l);
    let mut bits: Vec<bool> = (0..l).rev().map(|i| (s >> i) & 1 == 1).collect();
    bits.push(true);
    bits
}

fn cantor_index(bits: &[bool]) -> u64 {
    let len = bits.iter().rposition(|&b| b).map_or(0, |i| i + 1);
    if len == 0 {
        return 0;
    }
    let l = (len - 1) as u32;
    let s = bits[..len - 1].iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    (1u64 << l) + s
}

fn as_bits(p: &[Coord]) -> &[bool] {
    match p.first() {
        Some(Coord::Bits(b)) => b,
        other => panic!("expected a Cantor coordinate, got {other:?}"),
    }
}

fn baire(a: &[bool], b: &[bool]) -> Dyadic {
    let n = a.len().max(b.len());
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(false);
        let y = b.get(i).copied().unwrap_or(false);
        if x != y {
            return Dyadic::pow2(i as i64);
        }
    }
    Dyadic::zero()
}

impl Presentation for Cantor {
    fn id(&self) -> SpaceId {
        SpaceId::Cantor
    }

    fn level_bits(&self, m: u32) -> u32 {
        m + 1
    }

    fn arity(&self) -> usize {
        1
    }

    fn point(&self, u: u64) -> Point {
        vec![Coord::Bits(cantor_bits(u))]
    }

    fn distance(&self, p: &[Coord], q: &[Coord]) -> Dyadic {
        baire(as_bits(p), as_bits(q))
    }

    fn round(&self, u: u64, m: u32) -> u64 {
        self.locate(&self.point(u), m)
    }

    /// Truncation after `m + 1` symbols.
    fn locate(&self, p: &[Coord], m: u32) -> u64 {
        let b = as_bits(p);
        let keep = b.len().min(m as usize + 1);
        cantor_index(&b[..keep])
    }

    fn ball(&self, p: &[Coord], r: &Dyadic, m: u32) -> Vec<u64> {
        let b = as_bits(p);
        if r.is_negative() {
            return Vec::new();
        }
        let width = m as usize + 1;
        // points agreeing with p on the first j symbols are within 2^-j
        let j = if r >= &Dyadic::one() {
            0
        } else if r.is_zero() {
            width
        } else {
            (-r.log2_ceil().unwrap_or(0)).max(0) as usize
        };
        let j = j.min(width);
        let prefix: Vec<bool> = (0..j).map(|i| b.get(i).copied().unwrap_or(false)).collect();
        let free = width - j;
        let mut out = Vec::with_capacity(1 << free);
        for tail in 0..(1u64 << free) {
            let mut word = prefix.clone();
            word.extend((0..free).rev().map(|i| (tail >> i) & 1 == 1));
            let q = vec![Coord::Bits(word)];
            if &self.distance(p, &q) <= r {
                out.push(cantor_index(as_bits(&q)));
            }
        }
        out.sort_unstable();
        out
    }

    fn separation(&self, m: u32) -> Option<u32> {
        Some(m)
    }
}

/// Cartesian product under the max metric with the block-interleaved
/// index layout: level `m` of the product is exactly the set of pairs of
/// level-`m` indices of the factors.
#[derive(Debug, Clone)]
pub struct Product {
    left: PresentedSpace,
    right: PresentedSpace,
    label: Option<SpaceId>,
}

impl Product {
    fn nx(&self, m: u32) -> u64 {
        self.left.level_count(m)
    }

    fn ny(&self, m: u32) -> u64 {
        self.right.level_count(m)
    }

    pub fn pair(&self, u: u64, v: u64) -> u64 {
        let m = self.left.level_of(u).max(self.right.level_of(v));
        if m == 0 {
            return u + self.nx(0) * v;
        }
        let (nx0, ny0, nx1) = (self.nx(m - 1), self.ny(m - 1), self.nx(m));
        if v >= ny0 {
            nx1 * ny0 + nx1 * (v - ny0) + u
        } else {
            nx0 * ny0 + (nx1 - nx0) * v + (u - nx0)
        }
    }

    pub fn unpair(&self, w: u64) -> (u64, u64) {
        let mut m = 0;
        while w >= self.nx(m) * self.ny(m) {
            m += 1;
        }
        if m == 0 {
            return (w % self.nx(0), w / self.nx(0));
        }
        let (nx0, ny0, nx1) = (self.nx(m - 1), self.ny(m - 1), self.nx(m));
        let block2 = nx1 * ny0;
        if w >= block2 {
            let r = w - block2;
            (r % nx1, ny0 + r / nx1)
        } else {
            let r = w - nx0 * ny0;
            let span = nx1 - nx0;
            (nx0 + r % span, r / span)
        }
    }

    fn split<'a>(&self, p: &'a [Coord]) -> (&'a [Coord], &'a [Coord]) {
        p.split_at(self.left.arity())
    }

    fn join(&self, mut a: Point, b: Point) -> Point {
        a.extend(b);
        a
    }
}

impl Presentation for Product {
    fn id(&self) -> SpaceId {
        self.label.clone().unwrap_or_else(|| SpaceId::Product(Box::new(self.left.id()), Box::new(self.right.id())))
    }

    fn level_bits(&self, m: u32) -> u32 {
        self.left.level_bits(m) + self.right.level_bits(m)
    }

    fn arity(&self) -> usize {
        self.left.arity() + self.right.arity()
    }

    fn point(&self, w: u64) -> Point {
        let (u, v) = self.unpair(w);
        self.join(self.left.point(u), self.right.point(v))
    }

    fn distance(&self, p: &[Coord], q: &[Coord]) -> Dyadic {
        let (p1, p2) = self.split(p);
        let (q1, q2) = self.split(q);
        self.left.distance(p1, q1).max_with(&self.right.distance(p2, q2))
    }

    fn round(&self, w: u64, m: u32) -> u64 {
        let (u, v) = self.unpair(w);
        self.pair(self.left.round(u, m), self.right.round(v, m))
    }

    fn locate(&self, p: &[Coord], m: u32) -> u64 {
        let (p1, p2) = self.split(p);
        self.pair(self.left.locate(p1, m), self.right.locate(p2, m))
    }

    fn ball(&self, p: &[Coord], r: &Dyadic, m: u32) -> Vec<u64> {
        let (p1, p2) = self.split(p);
        let a = self.left.ball(p1, r, m);
        let b = self.right.ball(p2, r, m);
        let mut out: Vec<u64> =
            b.iter().flat_map(|&v| a.iter().map(move |&u| (u, v))).map(|(u, v)| self.pair(u, v)).collect();
        out.sort_unstable();
        out
    }

    fn box_query(&self, lo: &[Dyadic], hi: &[Dyadic], r: &Dyadic, m: u32) -> Option<Vec<u64>> {
        let k = self.left.arity();
        let a = self.left.box_query(&lo[..k], &hi[..k], r, m)?;
        let b = self.right.box_query(&lo[k..], &hi[k..], r, m)?;
        let mut out: Vec<u64> =
            b.iter().flat_map(|&v| a.iter().map(move |&u| (u, v))).map(|(u, v)| self.pair(u, v)).collect();
        out.sort_unstable();
        Some(out)
    }

    fn separation(&self, m: u32) -> Option<u32> {
        Some(self.left.separation(m)?.max(self.right.separation(m)?))
    }

    fn diameter(&self) -> Dyadic {
        self.left.diameter().max_with(&self.right.diameter())
    }

    fn enumerate(&self, m: u32) -> Vec<u64> {
        let a = self.left.enumerate(m);
        let b = self.right.enumerate(m);
        let mut out: Vec<u64> =
            b.iter().flat_map(|&v| a.iter().map(move |&u| (u, v))).map(|(u, v)| self.pair(u, v)).collect();
        out.sort_unstable();
        out
    }

    fn factors(&self) -> Option<(PresentedSpace, PresentedSpace)> {
        Some((self.left.clone(), self.right.clone()))
    }
}

pub fn unit_interval() -> PresentedSpace {
    PresentedSpace::new(UnitInterval)
}

pub fn circle() -> PresentedSpace {
    PresentedSpace::new(Circle)
}

pub fn cantor() -> PresentedSpace {
    PresentedSpace::new(Cantor)
}

pub fn product(x: &PresentedSpace, y: &PresentedSpace) -> PresentedSpace {
    PresentedSpace::new(Product { left: x.clone(), right: y.clone(), label: None })
}

/// `[0,1]^d` as a left fold of products over the unit interval.
pub fn cube(d: usize) -> PresentedSpace {
    assert!(d >= 1, "cube dimension must be positive");
    let mut s = unit_interval();
    for k in 2..=d {
        s = PresentedSpace::new(Product { left: s, right: unit_interval(), label: Some(SpaceId::Cube(k)) });
    }
    s
}

/// Pair two factor indices in a product space.
pub fn pair(s: &PresentedSpace, u: u64, v: u64) -> Option<u64> {
    let (x, y) = s.factors()?;
    let p = Product { left: x, right: y, label: None };
    Some(p.pair(u, v))
}

/// Split a product index into its factor indices.
pub fn unpair(s: &PresentedSpace, w: u64) -> Option<(u64, u64)> {
    let (x, y) = s.factors()?;
    let p = Product { left: x, right: y, label: None };
    Some(p.unpair(w))
}

/// `D(n)`: an upper bound on the base-2 log of the number of
/// `2^(-n-1)`-balls needed to cover the space.
pub fn entropy_upper(s: &PresentedSpace, n: u32) -> u32 {
    s.level_bits(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub ok: bool,
    /// Largest distance observed between a probe and its nearest cover point
    /// (covering) or between an index and its rounding (rounding).
    pub worst: Dyadic,
    pub checked: u64,
}

fn nearest_in(
    s: &PresentedSpace,
    p: &[Coord],
    cover: &HashSet<u64>,
    cover_list: &[u64],
    hint: &Dyadic,
    m: u32,
) -> Dyadic {
    let near: Vec<u64> = s.ball(p, hint, m).into_iter().filter(|u| cover.contains(u)).collect();
    let pool: &[u64] = if near.is_empty() { cover_list } else { &near };
    pool.iter().map(|&u| s.distance(p, &s.point(u))).min().unwrap_or_else(|| s.diameter())
}

/// Checks that every probe point at `probe_level` has a level-`m` point
/// within `2^(-m-1) + 2^(-probe_level)`. Products reduce exactly to their
/// factors because the max metric decouples the coordinates.
pub fn covering_check(s: &PresentedSpace, m: u32, probe_level: u32) -> CheckReport {
    assert!(probe_level > m, "probe level must exceed the covering level");
    let bound = &Dyadic::pow2(m as i64 + 1) + &Dyadic::pow2(probe_level as i64);
    if let Some((x, y)) = s.factors() {
        let a = covering_check(&x, m, probe_level);
        let b = covering_check(&y, m, probe_level);
        let worst = a.worst.max_with(&b.worst);
        return CheckReport { ok: worst <= bound, worst, checked: a.checked * b.checked };
    }
    let cover_list = s.enumerate(m);
    let cover: HashSet<u64> = cover_list.iter().copied().collect();
    let probes = s.probe_points(probe_level);
    let mut worst = Dyadic::zero();
    for p in &probes {
        let g = nearest_in(s, p, &cover, &cover_list, &bound, m);
        if g > worst {
            worst = g;
        }
    }
    CheckReport { ok: worst <= bound, worst, checked: probes.len() as u64 }
}

/// Above this many indices, product rounding checks recurse into the
/// factors instead of scanning the product level directly.
const ROUNDING_SCAN_CAP: u64 = 1 << 22;

/// Checks `d(xi(round(u,m)), xi(u)) <= 2^(-m-1)` and `round(u,m)` in level
/// `m` for every index of level `m + j`.
pub fn rounding_check(s: &PresentedSpace, m: u32, j: u32) -> CheckReport {
    let bound = Dyadic::pow2(m as i64 + 1);
    let fine = s.level_count(m + j);
    if fine > ROUNDING_SCAN_CAP {
        if let Some((x, y)) = s.factors() {
            let a = rounding_check(&x, m, j);
            let b = rounding_check(&y, m, j);
            // componentwise rounding is what the product claims; spot-check it
            let stride = (fine / 4096).max(1);
            let mut consistent = true;
            let mut w = 0;
            while w < fine {
                let (u, v) = unpair(s, w).unwrap();
                consistent &= s.round(w, m) == pair(s, x.round(u, m), y.round(v, m)).unwrap();
                w += stride;
            }
            let worst = a.worst.max_with(&b.worst);
            return CheckReport { ok: a.ok && b.ok && consistent, worst, checked: a.checked + b.checked };
        }
    }
    let count = s.level_count(m);
    let mut worst = Dyadic::zero();
    let mut ok = true;
    for u in 0..fine {
        let r = s.round(u, m);
        if r >= count {
            ok = false;
        }
        let d = s.index_distance(r, u);
        if d > worst {
            worst = d;
        }
    }
    CheckReport { ok: ok && worst <= bound, worst, checked: fine }
}

/// Checks the declared separation exhaustively at level `m`.
pub fn separation_check(s: &PresentedSpace, m: u32) -> Option<bool> {
    let eta = s.separation(m)?;
    let min = Dyadic::pow2(eta as i64);
    let idx = s.enumerate(m);
    let pts: Vec<Point> = idx.iter().map(|&u| s.point(u)).collect();
    for i in 0..pts.len() {
        for k in i + 1..pts.len() {
            if s.distance(&pts[i], &pts[k]) < min {
                return Some(false);
            }
        }
    }
    Some(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Point {
        vec![Coord::Real(s.parse().unwrap())]
    }

    #[test]
    fn interval_enumeration() {
        let s = unit_interval();
        let want = ["0", "1/2", "1/4", "3/4", "1/8", "3/8"];
        for (u, w) in want.iter().enumerate() {
            assert_eq!(s.point(u as u64), r(w));
        }
        assert_eq!(s.distance_enclosure(1, 3, 10), DyadicInterval::point("1/4".parse().unwrap()));
        let v = s.round(3, 0);
        assert!(v < 2);
        assert!(s.index_distance(v, 3) <= Dyadic::pow2(1));
    }

    #[test]
    fn interval_round_formula_matches_nearest() {
        // oracle: nearest level-m grid point by exhaustive scan
        let s = unit_interval();
        for m in 0..5 {
            for u in 0..(1u64 << 9) {
                let got = s.round(u, m);
                let best = (0..s.level_count(m)).map(|v| s.index_distance(u, v)).min().unwrap();
                assert!(s.index_distance(u, got) <= Dyadic::pow2(m as i64 + 1));
                assert!(s.index_distance(u, got) <= &best + &Dyadic::pow2(m as i64 + 1));
            }
        }
    }

    #[test]
    fn rho_index_inverts() {
        let s = unit_interval();
        for u in 0..512u64 {
            let x = s.point(u);
            assert_eq!(s.locate(&x, 8), u);
        }
    }

    #[test]
    fn circle_metric() {
        let c = circle();
        assert_eq!(c.distance(&r("0"), &r("3/4")), "1/4".parse().unwrap());
        assert_eq!(c.distance(&r("1/4"), &r("3/4")), "1/2".parse().unwrap());
        assert_eq!(c.distance(&r("3/8"), &r("3/8")), Dyadic::zero());
        assert_eq!(c.level_count(0), 1);
    }

    #[test]
    fn cantor_enumeration() {
        let c = cantor();
        assert_eq!(c.point(0), vec![Coord::Bits(vec![])]);
        assert_eq!(c.point(1), vec![Coord::Bits(vec![true])]);
        assert_eq!(c.point(2), vec![Coord::Bits(vec![false, true])]);
        assert_eq!(c.point(3), vec![Coord::Bits(vec![true, true])]);
        assert_eq!(c.index_distance(0, 1), Dyadic::one());
        for u in 0..256 {
            assert_eq!(cantor_index(&cantor_bits(u)), u);
        }
    }

    #[test]
    fn product_layout() {
        let sq = cube(2);
        let ns: Vec<u64> = (0..4).map(|m| sq.level_count(m)).collect();
        assert_eq!(ns, vec![4, 16, 64, 256]);
        for m in 0..5 {
            let n = 1u64 << (m + 1);
            let mut seen = HashSet::new();
            for u in 0..n {
                for v in 0..n {
                    let w = pair(&sq, u, v).unwrap();
                    assert!(w < sq.level_count(m), "pair({u},{v}) = {w} outside level {m}");
                    assert_eq!(unpair(&sq, w), Some((u, v)));
                    seen.insert(w);
                }
            }
            assert_eq!(seen.len() as u64, sq.level_count(m));
        }
        let p = real_point(&[Dyadic::zero(), Dyadic::zero()]);
        let q = real_point(&["1/2".parse().unwrap(), "1/4".parse().unwrap()]);
        assert_eq!(sq.distance(&p, &q), "1/2".parse().unwrap());
    }

    #[test]
    fn space_ids_round_trip() {
        for s in [
            "interval",
            "circle",
            "cantor",
            "cube:2",
            "cube:3",
            "product(interval,circle)",
            "product(product(cantor,circle),interval)",
        ] {
            let id: SpaceId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
            assert_eq!(id.build().unwrap().id(), id);
        }
        assert!("sphere".parse::<SpaceId>().is_err());
        assert!("cube:0".parse::<SpaceId>().is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_upper(&unit_interval(), 4), 5);
        assert_eq!(entropy_upper(&circle(), 4), 4);
        assert_eq!(entropy_upper(&product(&unit_interval(), &unit_interval()), 4), 10);
    }

    #[test]
    fn small_covering_checks() {
        assert!(covering_check(&unit_interval(), 3, 8).ok);
        assert!(covering_check(&circle(), 3, 8).ok);
        assert!(covering_check(&cantor(), 3, 8).ok);
    }

    #[test]
    fn cantor_ball_matches_scan() {
        let c = cantor();
        for u in 0..64 {
            let p = c.point(u);
            for k in 0..6 {
                let rad = Dyadic::pow2(k);
                let got = c.ball(&p, &rad, 4);
                let want: Vec<u64> = (0..c.level_count(4)).filter(|&v| c.distance(&p, &c.point(v)) <= rad).collect();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn interval_and_circle_balls_match_scan() {
        for s in [unit_interval(), circle()] {
            for u in 0..128 {
                let p = s.point(u);
                for rad in ["0", "1/16", "3/32", "1/4", "1/2", "2"] {
                    let rad: Dyadic = rad.parse().unwrap();
                    let mut got = s.ball(&p, &rad, 4);
                    got.sort_unstable();
                    let want: Vec<u64> =
                        (0..s.level_count(4)).filter(|&v| s.distance(&p, &s.point(v)) <= rad).collect();
                    assert_eq!(got, want, "{:?} u={u} r={rad}", s.id());
                }
            }
        }
    }
}
