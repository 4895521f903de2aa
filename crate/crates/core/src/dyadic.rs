//! Exact dyadic rationals and closed dyadic intervals.
//!
//! A [`Dyadic`] is `mantissa * 2^(-exponent)` with an arbitrary-size
//! mantissa. Values are kept canonical (odd mantissa, or zero with exponent
//! zero), so structural equality is numeric equality. Addition, subtraction,
//! multiplication, comparison and scaling by powers of two are exact; the only
//! rounding operations are the explicit ones ([`Dyadic::round_to`],
//! [`Dyadic::floor_to`], [`Dyadic::ceil_to`], [`Dyadic::div_round`]) and
//! [`sqrt_enclosure`], which rounds outward.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DyadicError {
    #[error("cannot parse {0:?} as a dyadic rational")]
    Parse(String),
    #[error("{0} is not a dyadic rational (denominator is not a power of two)")]
    NotDyadic(String),
    #[error("square root of an interval reaching below zero ({0})")]
    NegativeSqrt(String),
    #[error("interval bounds out of order: [{lo}, {hi}]")]
    Inverted { lo: String, hi: String },
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("division by zero")]
    DivByZero,
}

/// An exact binary rational `mantissa / 2^exponent`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    /// `mant / 2^exp`, canonicalized.
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    /// `a / 2^k`
    pub fn ratio(a: i64, k: i64) -> Self {
        Dyadic::new(BigInt::from(a), k)
    }

    /// `2^(-k)`
    pub fn pow2(k: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp -= tz as i64;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    /// Exponent `e` in `m / 2^e`; negative for even integers.
    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn min_with(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max_with(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Multiply by `2^k` (k may be negative).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp - k }
    }

    pub fn halve(&self) -> Self {
        self.mul_pow2(-1)
    }

    pub fn double(&self) -> Self {
        self.mul_pow2(1)
    }

    /// The mantissa of `self * 2^k` when that product is an integer.
    pub fn scaled_int(&self, k: i64) -> Option<BigInt> {
        let shift = k - self.exp;
        if self.is_zero() {
            Some(BigInt::zero())
        } else if shift >= 0 {
            Some(&self.mant << (shift as usize))
        } else {
            None
        }
    }

    /// `floor(self * 2^k)` as an integer.
    pub fn floor_scaled(&self, k: i64) -> BigInt {
        let shift = k - self.exp;
        if shift >= 0 {
            &self.mant << (shift as usize)
        } else {
            self.mant.div_floor(&(BigInt::one() << ((-shift) as usize)))
        }
    }

    /// `ceil(self * 2^k)` as an integer.
    pub fn ceil_scaled(&self, k: i64) -> BigInt {
        -(-self).floor_scaled(k)
    }

    /// Nearest multiple of `2^(-k)`, ties to the even multiple.
    pub fn round_to(&self, k: i64) -> Self {
        let shift = self.exp - k;
        if shift <= 0 {
            return self.clone();
        }
        let unit = BigInt::one() << (shift as usize);
        let (q, r) = self.mant.div_mod_floor(&unit);
        let twice = &r << 1usize;
        let q = match twice.cmp(&unit) {
            Ordering::Less => q,
            Ordering::Greater => q + 1,
            Ordering::Equal => {
                if q.is_even() {
                    q
                } else {
                    q + 1
                }
            }
        };
        Dyadic::new(q, k)
    }

    /// Largest multiple of `2^(-k)` not above `self`.
    pub fn floor_to(&self, k: i64) -> Self {
        Dyadic::new(self.floor_scaled(k), k)
    }

    /// Smallest multiple of `2^(-k)` not below `self`.
    pub fn ceil_to(&self, k: i64) -> Self {
        Dyadic::new(self.ceil_scaled(k), k)
    }

    /// `self / other` rounded to a multiple of `2^(-k)`, downward when `up`
    /// is false and upward otherwise.
    pub fn div_round(&self, other: &Self, k: i64, up: bool) -> Result<Self, DyadicError> {
        if other.is_zero() {
            return Err(DyadicError::DivByZero);
        }
        // self/other * 2^k = (ma * 2^(eb - ea + k)) / mb
        let e = other.exp - self.exp + k;
        let (num, den) = if e >= 0 {
            (&self.mant << (e as usize), other.mant.clone())
        } else {
            (self.mant.clone(), &other.mant << ((-e) as usize))
        };
        let q = if up { num.div_ceil(&den) } else { num.div_floor(&den) };
        Ok(Dyadic::new(q, k))
    }

    /// Smallest `e` with `|self| <= 2^e`; `None` for zero.
    pub fn log2_ceil(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let m = self.mant.abs();
        let bits = m.bits() as i64;
        // 2^(bits-1) <= m < 2^bits, exact power when m == 1 (odd mantissa)
        let e = if m.is_one() { 0 } else { bits };
        Some(e - self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.mant.to_f64().unwrap_or(f64::NAN);
        if self.exp >= 0 {
            let mut v = m;
            let mut e = self.exp;
            while e > 1000 {
                v /= 2f64.powi(1000);
                e -= 1000;
            }
            v / 2f64.powi(e as i32)
        } else {
            m * 2f64.powi((-self.exp).min(2000) as i32)
        }
    }

    /// Exact conversion from a finite `f64` (every finite double is dyadic).
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) =
            if exp_bits == 0 { (frac as i64, -1074) } else { ((frac | (1u64 << 52)) as i64, exp_bits - 1075) };
        Some(Dyadic::new(BigInt::from(sign * mant), -e))
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::new(self.mant.clone(), BigInt::one() << (self.exp as usize))
        } else {
            BigRational::from_integer(&self.mant << ((-self.exp) as usize))
        }
    }

    /// Exact conversion when the reduced denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let den = r.denom();
        if den.is_zero() || den.is_negative() {
            return None;
        }
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz as usize) != BigInt::one() {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), tz as i64))
    }

    /// Decimal rendering with `digits` fractional digits, rounded to nearest
    /// with halves away from zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let ten = BigInt::from(10u32).pow(digits as u32);
        let r = self.to_rational() * BigRational::from_integer(ten);
        let rounded = r.round().to_integer();
        let neg = rounded.is_negative();
        let s = rounded.abs().to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// Parse `"m/2^e"`, `"a/b"` with `b` a power of two, an integer, or an
    /// exact decimal literal such as `"0.375"` or `"-1.5"`.
    pub fn parse(s: &str) -> Result<Self, DyadicError> {
        let t = s.trim();
        if t.is_empty() {
            return Err(DyadicError::Parse(s.to_string()));
        }
        if let Some((num, den)) = t.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| DyadicError::Parse(s.to_string()))?;
            let den = den.trim();
            if let Some(e) = den.strip_prefix("2^") {
                let e: i64 = e.trim().parse().map_err(|_| DyadicError::Parse(s.to_string()))?;
                return Ok(Dyadic::new(num, e));
            }
            let den: BigInt = den.parse().map_err(|_| DyadicError::Parse(s.to_string()))?;
            if den.is_zero() {
                return Err(DyadicError::Parse(s.to_string()));
            }
            let r = BigRational::new(num, den);
            return Dyadic::from_rational(&r).ok_or_else(|| DyadicError::NotDyadic(s.to_string()));
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty()
            || !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(DyadicError::Parse(s.to_string()));
        }
        let digits = format!("{int}{frac}");
        let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let r = BigRational::new(if neg { -num } else { num }, den);
        Dyadic::from_rational(&r).ok_or_else(|| DyadicError::NotDyadic(s.to_string()))
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl fmt::Display for Dyadic {
    /// Canonical `m/2^e` for non-integers, plain integer otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp <= 0 {
            write!(f, "{}", &self.mant << ((-self.exp) as usize))
        } else {
            write!(f, "{}/2^{}", self.mant, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Dyadic {
    type Err = DyadicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dyadic::parse(s)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Dyadic::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if self.exp == other.exp {
            return self.mant.cmp(&other.mant);
        }
        if self.exp > other.exp {
            let b = &other.mant << ((self.exp - other.exp) as usize);
            self.mant.cmp(&b)
        } else {
            let a = &self.mant << ((other.exp - self.exp) as usize);
            a.cmp(&other.mant)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_ref(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let exp = a.exp.max(b.exp);
    let ma = if a.exp < exp { &a.mant << ((exp - a.exp) as usize) } else { a.mant.clone() };
    let mb = if b.exp < exp { &b.mant << ((exp - b.exp) as usize) } else { b.mant.clone() };
    Dyadic::new(ma + mb, exp)
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        add_ref(self, rhs)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        add_ref(&self, &rhs)
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        add_ref(self, &-rhs)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        add_ref(&self, &-rhs)
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        // product of odd mantissas is odd, so this is already canonical
        Dyadic::new(&self.mant * &rhs.mant, self.exp + rhs.exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |a, b| &a + &b)
    }
}

/// Closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl DyadicInterval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self, DyadicError> {
        if lo > hi {
            return Err(DyadicError::Inverted { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(DyadicInterval { lo, hi })
    }

    /// Builds `[min(a,b), max(a,b)]`.
    pub fn spanning(a: Dyadic, b: Dyadic) -> Self {
        if a <= b {
            DyadicInterval { lo: a, hi: b }
        } else {
            DyadicInterval { lo: b, hi: a }
        }
    }

    pub fn point(x: Dyadic) -> Self {
        DyadicInterval { lo: x.clone(), hi: x }
    }

    pub fn unit() -> Self {
        DyadicInterval { lo: Dyadic::zero(), hi: Dyadic::one() }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi).halve()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        DyadicInterval { lo: self.lo.min_with(&other.lo), hi: self.hi.max_with(&other.hi) }
    }

    /// Widen both ends by `r >= 0`.
    pub fn inflate(&self, r: &Dyadic) -> Self {
        DyadicInterval { lo: &self.lo - r, hi: &self.hi + r }
    }

    pub fn add(&self, other: &Self) -> Self {
        DyadicInterval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Self) -> Self {
        DyadicInterval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn neg(&self) -> Self {
        DyadicInterval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let c = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if v < &lo {
                lo = v.clone();
            }
            if v > &hi {
                hi = v.clone();
            }
        }
        DyadicInterval { lo, hi }
    }

    pub fn scale(&self, k: &Dyadic) -> Self {
        DyadicInterval::spanning(&self.lo * k, &self.hi * k)
    }

    pub fn abs(&self) -> Self {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            self.neg()
        } else {
            DyadicInterval { lo: Dyadic::zero(), hi: self.hi.max_with(&-&self.lo) }
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        DyadicInterval { lo: self.lo.min_with(&other.lo), hi: self.hi.min_with(&other.hi) }
    }

    pub fn max(&self, other: &Self) -> Self {
        DyadicInterval { lo: self.lo.max_with(&other.lo), hi: self.hi.max_with(&other.hi) }
    }

    /// Largest absolute value attained on the interval.
    pub fn mag(&self) -> Dyadic {
        self.lo.abs().max_with(&self.hi.abs())
    }

    /// Round endpoints outward to multiples of `2^(-k)`.
    pub fn outward(&self, k: i64) -> Self {
        DyadicInterval { lo: self.lo.floor_to(k), hi: self.hi.ceil_to(k) }
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Enclosure of `{sqrt(t) : t in interval}` whose width exceeds the width of
/// the exact image by at most `2^(-k)`.
pub fn sqrt_enclosure(interval: &DyadicInterval, k: u32) -> Result<DyadicInterval, DyadicError> {
    if interval.lo().is_negative() {
        return Err(DyadicError::NegativeSqrt(interval.to_string()));
    }
    // each endpoint is rounded to the grid 2^-(k+1)
    let p = k as i64 + 1;
    let lo_scaled = interval.lo().floor_scaled(2 * p);
    let lo = Dyadic::new(lo_scaled.sqrt(), p);
    let hi_exact = interval.hi();
    let t = hi_exact.ceil_scaled(2 * p);
    let mut s = t.sqrt();
    let s_d = Dyadic::new(s.clone(), p);
    if &(&s_d * &s_d) < hi_exact {
        s += 1;
    }
    let hi = Dyadic::new(s, p);
    Ok(DyadicInterval { lo, hi })
}

/// Max-metric distance between two coordinate vectors.
pub fn interval_max_metric(p: &[Dyadic], q: &[Dyadic]) -> Result<Dyadic, DyadicError> {
    if p.len() != q.len() {
        return Err(DyadicError::Dimension(p.len(), q.len()));
    }
    Ok(max_metric(p, q))
}

pub(crate) fn max_metric(p: &[Dyadic], q: &[Dyadic]) -> Dyadic {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(Dyadic::zero(), |acc, d| acc.max_with(&d))
}

/// Outward-rounded enclosure of pi with 64 fractional bits:
/// `floor(pi * 2^64) = 57952155664616982739`.
pub fn pi_enclosure() -> DyadicInterval {
    let lo: BigInt = "57952155664616982739".parse().unwrap();
    let hi = &lo + 1;
    DyadicInterval { lo: Dyadic::new(lo, 64), hi: Dyadic::new(hi, 64) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let x = Dyadic::new(BigInt::from(12), 3);
        assert_eq!(x.mantissa(), &BigInt::from(3));
        assert_eq!(x.exponent(), 1);
        let z = Dyadic::new(BigInt::zero(), 17);
        assert_eq!(z.exponent(), 0);
        assert_eq!(d("6/2^2"), d("1.5"));
        assert_eq!(d("8").exponent(), -3);
    }

    #[test]
    fn round_to_examples() {
        assert_eq!(d("3/8").round_to(1), d("1/2"));
        assert_eq!(d("1/2").round_to(3), d("1/2"));
        assert_eq!(Dyadic::zero().round_to(5), Dyadic::zero());
        // ties to even: 1/8 sits between 0 and 1/4
        assert_eq!(d("1/8").round_to(2), Dyadic::zero());
        assert_eq!(d("-3/8").round_to(2), d("-1/2"));
    }

    #[test]
    fn round_to_against_enumeration() {
        // oracle: scan multiples a/2 of the grid around x and pick the nearest
        for num in -40..=40i64 {
            let x = Dyadic::ratio(num, 3);
            let got = x.round_to(1);
            let mut best: Option<(Dyadic, Dyadic)> = None;
            for a in -12..=12i64 {
                let g = Dyadic::ratio(a, 1);
                let dist = (&g - &x).abs();
                let better = match &best {
                    None => true,
                    Some((_, bd)) => dist < *bd || (dist == *bd && a % 2 == 0),
                };
                if better {
                    best = Some((g, dist));
                }
            }
            assert_eq!(got, best.unwrap().0, "x = {x}");
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(d("0.375").to_string(), "3/2^3");
        assert_eq!(d("3/8").to_string(), "3/2^3");
        assert_eq!(d("-5").to_string(), "-5");
        assert_eq!(d("1/2^10"), Dyadic::pow2(10));
        assert!(matches!(Dyadic::parse("1/3"), Err(DyadicError::NotDyadic(_))));
        assert!(matches!(Dyadic::parse("0.1"), Err(DyadicError::NotDyadic(_))));
        assert!(Dyadic::parse("abc").is_err());
        assert!(Dyadic::parse("0.0795775").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(d("1/8").to_decimal(3), "0.125");
        assert_eq!(d("-1/8").to_decimal(2), "-0.13");
        assert_eq!(d("5").to_decimal(0), "5");
        assert_eq!(d("1/1024").to_decimal(4), "0.0010");
    }

    #[test]
    fn sqrt_examples() {
        let j = sqrt_enclosure(&DyadicInterval::point(d("4")), 10).unwrap();
        assert!(j.contains(&d("2")));
        assert!(j.width() <= Dyadic::pow2(10));

        let j = sqrt_enclosure(&DyadicInterval::point(Dyadic::zero()), 4).unwrap();
        assert_eq!(j, DyadicInterval::point(Dyadic::zero()));

        // bisection oracle on t -> t^2 for sqrt(2)
        let two = d("2");
        let (mut lo, mut hi) = (d("1"), d("2"));
        for _ in 0..40 {
            let mid = (&lo + &hi).halve();
            if &mid * &mid <= two {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let j = sqrt_enclosure(&DyadicInterval::point(two), 20).unwrap();
        assert!(j.lo() <= &lo && &hi <= j.hi(), "{j} vs [{lo},{hi}]");
        assert!(j.width() <= Dyadic::pow2(20));

        assert!(sqrt_enclosure(&DyadicInterval::new(d("-1"), d("1")).unwrap(), 3).is_err());
    }

    #[test]
    fn max_metric_examples() {
        let m = |p: &[&str], q: &[&str]| {
            let p: Vec<_> = p.iter().map(|s| d(s)).collect();
            let q: Vec<_> = q.iter().map(|s| d(s)).collect();
            interval_max_metric(&p, &q)
        };
        assert_eq!(m(&["0", "0"], &["1", "1"]).unwrap(), d("1"));
        assert_eq!(m(&["1/2", "0"], &["0", "1/4"]).unwrap(), d("1/2"));
        assert_eq!(m(&["0", "0"], &["0", "0"]).unwrap(), d("0"));
        assert!(matches!(m(&["0"], &["0", "1"]), Err(DyadicError::Dimension(1, 2))));
    }

    #[test]
    fn pi_brackets() {
        let pi = pi_enclosure();
        assert!(pi.lo().to_f64() <= std::f64::consts::PI && std::f64::consts::PI <= pi.hi().to_f64());
        assert_eq!(pi.width(), Dyadic::pow2(64));
    }

    #[test]
    fn f64_round_trip() {
        for v in [0.0, 1.5, -0.1, 1e-300, 123456.789] {
            assert_eq!(Dyadic::from_f64(v).unwrap().to_f64(), v);
        }
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (-(1i64 << 40)..(1i64 << 40), -8i64..40).prop_map(|(m, e)| Dyadic::ratio(m, e))
    }

    proptest! {
        #[test]
        fn exact_ops_agree_with_rationals(a in arb_dyadic(), b in arb_dyadic()) {
            let (ra, rb) = (a.to_rational(), b.to_rational());
            prop_assert_eq!((&a + &b).to_rational(), &ra + &rb);
            prop_assert_eq!((&a - &b).to_rational(), &ra - &rb);
            prop_assert_eq!((&a * &b).to_rational(), &ra * &rb);
            prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
            prop_assert_eq!(a.abs().to_rational(), ra.abs());
            prop_assert_eq!(a.halve().double(), a.clone());
            prop_assert_eq!(a.min_with(&b).to_rational(), ra.clone().min(rb.clone()));
        }

        #[test]
        fn round_to_idempotent_and_close(a in arb_dyadic(), k in 0i64..30) {
            let r = a.round_to(k);
            prop_assert_eq!(r.round_to(k), r.clone());
            prop_assert!((&r - &a).abs() <= Dyadic::pow2(k + 1));
            prop_assert!(r.scaled_int(k).is_some());
        }

        #[test]
        fn display_parse_round_trip(a in arb_dyadic()) {
            prop_assert_eq!(Dyadic::parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn sqrt_containment(m in 0i64..(1 << 40), e in 0i64..40, w in 0i64..(1 << 20), k in 0u32..40) {
            let lo = Dyadic::ratio(m, e);
            let hi = &lo + &Dyadic::ratio(w, 20);
            let j = sqrt_enclosure(&DyadicInterval::new(lo.clone(), hi.clone()).unwrap(), k).unwrap();
            prop_assert!(j.lo() * j.lo() <= lo);
            prop_assert!(j.hi() * j.hi() >= hi);
            // width bound: sqrt(hi)-sqrt(lo) <= (hi-lo)/ (sqrt(hi)+sqrt(lo)), checked via f64 with slack
            let image = hi.to_f64().sqrt() - lo.to_f64().sqrt();
            prop_assert!(j.width().to_f64() <= image + 2f64.powi(-(k as i32)) + 1e-9);
        }
    }
}
