//! Certified Fréchet distances between curves and loops in the max metric.
//!
//! The distance is approximated by the bottleneck dynamic program over
//! monotone couplings of curve samples on a uniform parameter grid of level
//! `m`. Sampled curves denote the polygonal curve through their samples, for
//! which the discrete value never underestimates the continuous one; the
//! Lipschitz bounds control the overestimate. Curves given by evaluators
//! get a two-sided enclosure.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::{max_metric, Dyadic, DyadicInterval};
use crate::functions::FunctionObject;
use crate::spaces::{reals, Coord};

/// Deepest grid level the refinement will use.
pub const MAX_GRID_LEVEL: u32 = 16;

/// Largest level accepted by [`go_chain_covers`].
pub const MAX_CHAIN_LEVEL: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrechetError {
    #[error("point lists must be non-empty")]
    Empty,
    #[error("invalid curve: {0}")]
    BadCurve(String),
    #[error("expected a {expected} curve")]
    Topology { expected: &'static str },
    #[error("curves have different dimensions ({0} and {1})")]
    Dimension(usize, usize),
    #[error("required grid level {needed} exceeds the cap {cap}")]
    LevelCap { needed: u32, cap: u32 },
    #[error("input samples are not non-decreasing from 0 to 1")]
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Path,
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    Oriented,
    Unoriented,
}

impl std::str::FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oriented" => Ok(Orientation::Oriented),
            "unoriented" => Ok(Orientation::Unoriented),
            other => Err(format!("unknown orientation {other:?} (expected oriented or unoriented)")),
        }
    }
}

type ParamFn = dyn Fn(&Dyadic) -> Vec<Dyadic> + Send + Sync;
type LoopCandidate = (Dyadic, bool, usize, Vec<(usize, usize)>);

#[derive(Clone)]
enum Source {
    /// Samples on the level-`level` grid; denotes the polygonal curve.
    Samples { level: u32, points: Vec<Vec<Dyadic>> },
    /// Exact evaluation at dyadic parameters.
    Exact(Arc<ParamFn>),
    /// Finite maps of a function object on the unit interval or circle.
    Function(FunctionObject),
}

/// A Lipschitz curve `[0,1] -> R^d` or loop `S^1 -> R^d`.
#[derive(Clone)]
pub struct Curve {
    topology: Topology,
    dim: usize,
    lipschitz: Dyadic,
    source: Source,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.source {
            Source::Samples { level, .. } => format!("samples@{level}"),
            Source::Exact(_) => "exact".into(),
            Source::Function(_) => "function".into(),
        };
        f.debug_struct("Curve")
            .field("topology", &self.topology)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("source", &src)
            .finish()
    }
}

/// On-disk curve format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CurveFile {
    pub topology: Topology,
    pub dim: usize,
    pub lipschitz: Dyadic,
    pub samples: Vec<Vec<Dyadic>>,
}

impl Curve {
    /// A polygonal curve through samples at parameters `i / 2^m`; the sample
    /// count must be `2^m + 1` and consecutive samples must respect the
    /// Lipschitz bound. Loops repeat their first sample at the end.
    pub fn from_samples(
        topology: Topology,
        lipschitz: Dyadic,
        points: Vec<Vec<Dyadic>>,
    ) -> Result<Curve, FrechetError> {
        let n = points.len();
        if n < 2 || !(n - 1).is_power_of_two() {
            return Err(FrechetError::BadCurve(format!("{n} samples; expected 2^m + 1")));
        }
        let level = (n - 1).trailing_zeros();
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(FrechetError::BadCurve("samples must share a positive dimension".into()));
        }
        if lipschitz.is_negative() {
            return Err(FrechetError::BadCurve("negative Lipschitz bound".into()));
        }
        let step = lipschitz.mul_pow2(-(level as i64));
        for (i, w) in points.windows(2).enumerate() {
            if max_metric(&w[0], &w[1]) > step {
                return Err(FrechetError::BadCurve(format!(
                    "samples {i} and {} are {} apart, above the declared bound {step}",
                    i + 1,
                    max_metric(&w[0], &w[1])
                )));
            }
        }
        if topology == Topology::Loop && points[0] != points[n - 1] {
            return Err(FrechetError::BadCurve("loop samples must end where they start".into()));
        }
        Ok(Curve { topology, dim, lipschitz, source: Source::Samples { level, points } })
    }

    pub fn from_file(f: &CurveFile) -> Result<Curve, FrechetError> {
        let c = Curve::from_samples(f.topology, f.lipschitz.clone(), f.samples.clone())?;
        if c.dim != f.dim {
            return Err(FrechetError::BadCurve(format!("declared dim {} but samples have dim {}", f.dim, c.dim)));
        }
        Ok(c)
    }

    /// The curve's samples at its native level, when it has one.
    pub fn to_file(&self) -> Option<CurveFile> {
        match &self.source {
            Source::Samples { points, .. } => Some(CurveFile {
                topology: self.topology,
                dim: self.dim,
                lipschitz: self.lipschitz.clone(),
                samples: points.clone(),
            }),
            _ => None,
        }
    }

    /// A curve evaluated exactly at dyadic parameters. The caller vouches
    /// for the Lipschitz bound, and loops must satisfy `f(0) == f(1)`.
    pub fn from_exact<F>(topology: Topology, dim: usize, lipschitz: Dyadic, f: F) -> Curve
    where
        F: Fn(&Dyadic) -> Vec<Dyadic> + Send + Sync + 'static,
    {
        Curve { topology, dim, lipschitz, source: Source::Exact(Arc::new(f)) }
    }

    /// A curve given by a function object on the unit interval or circle
    /// with real codomain coordinates.
    pub fn from_function(topology: Topology, lipschitz: Dyadic, f: FunctionObject) -> Curve {
        let dim = f.codomain().arity();
        Curve { topology, dim, lipschitz, source: Source::Function(f) }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> &Dyadic {
        &self.lipschitz
    }

    fn native_level(&self) -> u32 {
        match &self.source {
            Source::Samples { level, .. } => *level,
            _ => 0,
        }
    }

    /// Whether level-`m` samples are vertices of the denoted curve with
    /// straight segments in between.
    fn polygonal_at(&self, m: u32) -> bool {
        matches!(&self.source, Source::Samples { level, .. } if m >= *level)
    }

    fn rounded(&self) -> bool {
        matches!(&self.source, Source::Function(_))
    }

    /// Samples at parameters `i / 2^m`, `i = 0..=2^m`.
    pub fn samples_at(&self, m: u32) -> Vec<Vec<Dyadic>> {
        let n = 1usize << m;
        match &self.source {
            Source::Samples { level, points } => {
                if m <= *level {
                    let step = 1usize << (level - m);
                    (0..=n).map(|i| points[i * step].clone()).collect()
                } else {
                    let k = m - level;
                    let mask = (1usize << k) - 1;
                    (0..=n)
                        .map(|i| {
                            let (base, frac) = (i >> k, i & mask);
                            if frac == 0 {
                                return points[base].clone();
                            }
                            let t = Dyadic::ratio(frac as i64, k as i64);
                            points[base]
                                .iter()
                                .zip(&points[base + 1])
                                .map(|(a, b)| a + &((b - a) * t.clone()))
                                .collect()
                        })
                        .collect()
                }
            }
            Source::Exact(f) => (0..=n).map(|i| f(&Dyadic::ratio(i as i64, m as i64))).collect(),
            Source::Function(f) => {
                let mu = f.modulus().at(m + 2);
                let dom = f.domain_space();
                let y = f.codomain();
                (0..=n)
                    .map(|i| {
                        let t = Dyadic::ratio(i as i64, m as i64);
                        let a = dom.locate(&[Coord::Real(t)], mu);
                        reals(&y.point(f.finite_map(m + 2, a))).expect("real codomain")
                    })
                    .collect()
            }
        }
    }
}

/// A bottleneck value with an optimal coupling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coupling {
    pub value: Dyadic,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrechetResult {
    pub enclosure: DyadicInterval,
    /// Grid level of the samples the dynamic program ran on.
    pub resolution: u32,
    /// Optimal coupling of level-`resolution` sample indices.
    pub witness: Vec<(usize, usize)>,
    /// Bottleneck value realized by the witness.
    pub discrete: Dyadic,
    /// Whether the second curve was traversed backwards.
    pub reversed: bool,
    /// Cyclic shift applied to the second loop's samples.
    pub shift: Option<usize>,
}

const DIAG: u8 = 0;
const UP: u8 = 1;
const LEFT: u8 = 2;

/// Bottleneck DP over monotone couplings with steps (1,0), (0,1), (1,1).
/// Returns `None` as soon as a whole row exceeds `bound`, since every
/// coupling crosses every row.
fn bottleneck<T, F>(rows: usize, cols: usize, dist: F, bound: Option<&T>) -> Option<(T, Vec<(usize, usize)>)>
where
    T: Ord + Clone,
    F: Fn(usize, usize) -> T,
{
    let mut back = vec![DIAG; rows * cols];
    let mut prev: Vec<T> = Vec::with_capacity(cols);
    for j in 0..cols {
        let d = dist(0, j);
        let v = if j == 0 { d } else { d.max(prev[j - 1].clone()) };
        back[j] = LEFT;
        prev.push(v);
    }
    if bound.is_some_and(|b| prev.iter().min().unwrap() > b) {
        return None;
    }
    let mut cur: Vec<T> = prev.clone();
    for i in 1..rows {
        for j in 0..cols {
            let d = dist(i, j);
            let (best, dir) = if j == 0 {
                (&prev[0], UP)
            } else {
                let mut best = (&prev[j - 1], DIAG);
                if prev[j] < *best.0 {
                    best = (&prev[j], UP);
                }
                if cur[j - 1] < *best.0 {
                    best = (&cur[j - 1], LEFT);
                }
                best
            };
            let v = d.max(best.clone());
            back[i * cols + j] = dir;
            cur[j] = v;
        }
        if bound.is_some_and(|b| cur.iter().min().unwrap() > b) {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let value = prev[cols - 1].clone();
    let (mut i, mut j) = (rows - 1, cols - 1);
    let mut path = vec![(i, j)];
    while (i, j) != (0, 0) {
        match back[i * cols + j] {
            DIAG => {
                i -= 1;
                j -= 1;
            }
            UP => i -= 1,
            _ => j -= 1,
        }
        path.push((i, j));
    }
    path.reverse();
    Some((value, path))
}

/// Sample coordinates scaled to a common power of two: `x = v * 2^-exp`.
struct Scaled {
    exp: i64,
    a: Vec<Vec<i64>>,
    b: Vec<Vec<i64>>,
}

fn scale(a: &[Vec<Dyadic>], b: &[Vec<Dyadic>]) -> Option<Scaled> {
    let exp = a.iter().chain(b).flatten().map(|x| x.exponent()).max().unwrap_or(0);
    let limit = BigInt::from(1i64 << 61);
    let conv = |pts: &[Vec<Dyadic>]| -> Option<Vec<Vec<i64>>> {
        pts.iter()
            .map(|p| {
                p.iter()
                    .map(|x| {
                        let v = x.scaled_int(exp)?;
                        if v.magnitude() >= limit.magnitude() {
                            None
                        } else {
                            v.to_i64()
                        }
                    })
                    .collect()
            })
            .collect()
    };
    Some(Scaled { exp, a: conv(a)?, b: conv(b)? })
}

fn int_metric(p: &[i64], q: &[i64]) -> i64 {
    p.iter().zip(q).map(|(x, y)| (x - y).abs()).max().unwrap_or(0)
}

/// Bottleneck DP with an optional pruning bound; exact on dyadic input.
fn coupling_bounded(p: &[Vec<Dyadic>], q: &[Vec<Dyadic>], bound: Option<&Dyadic>) -> Option<Coupling> {
    match scale(p, q) {
        Some(s) => {
            let b = bound.map(|d| d.floor_scaled(s.exp).to_i64().unwrap_or(i64::MAX));
            let (v, pairs) = bottleneck(p.len(), q.len(), |i, j| int_metric(&s.a[i], &s.b[j]), b.as_ref())?;
            Some(Coupling { value: Dyadic::new(BigInt::from(v), s.exp), pairs })
        }
        None => {
            let (value, pairs) = bottleneck(p.len(), q.len(), |i, j| max_metric(&p[i], &q[j]), bound)?;
            Some(Coupling { value, pairs })
        }
    }
}

/// Exact discrete Fréchet distance between point lists with an optimal
/// coupling.
pub fn discrete_frechet(p: &[Vec<Dyadic>], q: &[Vec<Dyadic>]) -> Result<Coupling, FrechetError> {
    if p.is_empty() || q.is_empty() {
        return Err(FrechetError::Empty);
    }
    if p[0].len() != q[0].len() {
        return Err(FrechetError::Dimension(p[0].len(), q[0].len()));
    }
    Ok(coupling_bounded(p, q, None).expect("unbounded run completes"))
}

struct Slack {
    lower: Dyadic,
    upper: Dyadic,
}

fn slack(a: &Curve, b: &Curve, m: u32, loops: bool) -> Slack {
    let s = a.lipschitz() + b.lipschitz();
    let h = Dyadic::pow2(m as i64);
    let mut lower = &s * &h;
    let mut upper = Dyadic::zero();
    if !(a.polygonal_at(m) && b.polygonal_at(m)) {
        let interp = (&s * &h).halve();
        lower = lower + interp.clone();
        upper = upper + interp;
    }
    if a.rounded() || b.rounded() {
        lower = lower + h.halve();
        upper = upper + h.halve();
    }
    if loops {
        lower = lower + b.lipschitz() * &h;
    }
    Slack { lower, upper }
}

fn choose_level(a: &Curve, b: &Curve, n: u32, loops: bool) -> Result<u32, FrechetError> {
    let target = Dyadic::pow2(n as i64);
    let start = a.native_level().max(b.native_level()).min(MAX_GRID_LEVEL);
    for m in start..=MAX_GRID_LEVEL {
        let s = slack(a, b, m, loops);
        if s.lower + s.upper <= target {
            return Ok(m);
        }
    }
    Err(FrechetError::LevelCap { needed: MAX_GRID_LEVEL + 1, cap: MAX_GRID_LEVEL })
}

fn check_pair(a: &Curve, b: &Curve, topology: Topology) -> Result<(), FrechetError> {
    let expected = match topology {
        Topology::Path => "path",
        Topology::Loop => "loop",
    };
    if a.topology != topology || b.topology != topology {
        return Err(FrechetError::Topology { expected });
    }
    if a.dim != b.dim {
        return Err(FrechetError::Dimension(a.dim, b.dim));
    }
    Ok(())
}

fn enclose(value: &Dyadic, s: &Slack) -> DyadicInterval {
    let lo = (value - &s.lower).max_with(&Dyadic::zero());
    DyadicInterval::new(lo, value + &s.upper).expect("ordered")
}

/// Fréchet distance between two paths to width `2^-n`.
pub fn frechet_paths(a: &Curve, b: &Curve, orientation: Orientation, n: u32) -> Result<FrechetResult, FrechetError> {
    check_pair(a, b, Topology::Path)?;
    let m = choose_level(a, b, n, false)?;
    frechet_paths_at(a, b, orientation, m)
}

/// The path enclosure computed on the level-`m` grid.
pub fn frechet_paths_at(a: &Curve, b: &Curve, orientation: Orientation, m: u32) -> Result<FrechetResult, FrechetError> {
    check_pair(a, b, Topology::Path)?;
    let p = a.samples_at(m);
    let mut q = b.samples_at(m);
    let fwd = discrete_frechet(&p, &q)?;
    let mut best = (fwd, false);
    if orientation == Orientation::Unoriented {
        q.reverse();
        let bwd = discrete_frechet(&p, &q)?;
        if bwd.value < best.0.value {
            best = (bwd, true);
        }
    }
    let s = slack(a, b, m, false);
    Ok(FrechetResult {
        enclosure: enclose(&best.0.value, &s),
        resolution: m,
        witness: best.0.pairs,
        discrete: best.0.value,
        reversed: best.1,
        shift: None,
    })
}

/// Fréchet distance between two loops to width `2^-n`: the minimum of the
/// path program over every cyclic shift of the second loop's samples.
pub fn frechet_loops(a: &Curve, b: &Curve, orientation: Orientation, n: u32) -> Result<FrechetResult, FrechetError> {
    check_pair(a, b, Topology::Loop)?;
    let m = choose_level(a, b, n, true)?;
    frechet_loops_at(a, b, orientation, m)
}

/// The loop enclosure computed on the level-`m` grid.
pub fn frechet_loops_at(a: &Curve, b: &Curve, orientation: Orientation, m: u32) -> Result<FrechetResult, FrechetError> {
    check_pair(a, b, Topology::Loop)?;
    let p = a.samples_at(m);
    let q = b.samples_at(m);
    let len = q.len() - 1;
    let mut variants = vec![(false, q[..len].to_vec())];
    if orientation == Orientation::Unoriented {
        let mut r = q[..len].to_vec();
        r.reverse();
        variants.push((true, r));
    }
    // (value, reversed, shift, coupling); ties resolve to the first in
    // (reversed, shift) order so the result does not depend on search order
    let mut best: Option<LoopCandidate> = None;
    for (reversed, cyc) in &variants {
        let mut order: Vec<(Dyadic, usize)> = (0..len).map(|k| (max_metric(&p[0], &cyc[k]), k)).collect();
        order.sort();
        for (lb, k) in order {
            if best.as_ref().is_some_and(|b| lb > b.0) {
                break;
            }
            let shifted: Vec<Vec<Dyadic>> = (0..=len).map(|i| cyc[(i + k) % len].clone()).collect();
            let Some(c) = coupling_bounded(&p, &shifted, best.as_ref().map(|b| &b.0)) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => match c.value.cmp(&b.0) {
                    Ordering::Less => true,
                    Ordering::Equal => (*reversed, k) < (b.1, b.2),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((c.value, *reversed, k, c.pairs));
            }
        }
    }
    let (value, reversed, shift, pairs) = best.expect("at least one shift");
    let s = slack(a, b, m, true);
    Ok(FrechetResult {
        enclosure: enclose(&value, &s),
        resolution: m,
        witness: pairs,
        discrete: value,
        reversed,
        shift: Some(shift),
    })
}

/// A monotone lattice path on the level-`m` grid of the unit square from
/// `(0,0)` to `(2^m, 2^m)`; bit `i` of `steps` is set when step `i` goes up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoChain {
    pub level: u32,
    pub steps: u64,
}

impl GoChain {
    pub fn len(&self) -> usize {
        2usize << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid vertices visited, in `(x, y)` grid units.
    pub fn vertices(&self) -> Vec<(u64, u64)> {
        let mut out = vec![(0, 0)];
        let (mut x, mut y) = (0, 0);
        for i in 0..self.len() {
            if self.steps >> i & 1 == 1 {
                y += 1;
            } else {
                x += 1;
            }
            out.push((x, y));
        }
        out
    }

    /// Vertices as points of the unit square.
    pub fn points(&self) -> Vec<[Dyadic; 2]> {
        let m = self.level as i64;
        self.vertices().into_iter().map(|(x, y)| [Dyadic::ratio(x as i64, m), Dyadic::ratio(y as i64, m)]).collect()
    }

    /// Ends in the upper right corner and never repeats a step direction
    /// three times in a row.
    pub fn is_valid(&self) -> bool {
        let n = self.len();
        if n > 64 || (self.steps.count_ones() as usize) * 2 != n || (n < 64 && self.steps >> n != 0) {
            return false;
        }
        let mut run = 0;
        let mut last = None;
        for i in 0..n {
            let s = self.steps >> i & 1;
            run = if Some(s) == last { run + 1 } else { 1 };
            last = Some(s);
            if run > 2 {
                return false;
            }
        }
        true
    }
}

/// Every Go chain on the level-`m` grid: monotone lattice paths whose
/// up-steps and right-steps each come in runs of at most two, so that both
/// the chain and its transpose are graphs of 2-Lipschitz maps.
pub fn go_chain_covers(m: u32) -> Result<Vec<GoChain>, FrechetError> {
    if m > MAX_CHAIN_LEVEL {
        return Err(FrechetError::LevelCap { needed: m, cap: MAX_CHAIN_LEVEL });
    }
    let side = 1u32 << m;
    let mut out = Vec::new();
    // (x, y, steps, last direction, run length)
    let mut stack = vec![(0u32, 0u32, 0u64, 2u8, 0u8)];
    while let Some((x, y, steps, last, run)) = stack.pop() {
        if x == side && y == side {
            out.push(GoChain { level: m, steps });
            continue;
        }
        let i = x + y;
        for dir in [1u8, 0u8] {
            let (nx, ny) = if dir == 1 { (x, y + 1) } else { (x + 1, y) };
            if nx > side || ny > side {
                continue;
            }
            let nrun = if dir == last { run + 1 } else { 1 };
            if nrun > 2 {
                continue;
            }
            let nsteps = if dir == 1 { steps | 1 << i } else { steps };
            stack.push((nx, ny, nsteps, dir, nrun));
        }
    }
    out.sort();
    Ok(out)
}

/// The coupling value of a chain: the largest distance between `a[x]` and
/// `b[y]` over its vertices.
pub fn chain_value(chain: &GoChain, a: &[Vec<Dyadic>], b: &[Vec<Dyadic>]) -> Dyadic {
    chain
        .vertices()
        .into_iter()
        .map(|(x, y)| max_metric(&a[x as usize], &b[y as usize]))
        .max()
        .unwrap_or_else(Dyadic::zero)
}

/// A sampled map `xs[i] -> ys[i]`, linear in between.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledMap {
    pub xs: Vec<Dyadic>,
    pub ys: Vec<Dyadic>,
}

impl SampledMap {
    /// Piecewise-linear evaluation; `xs` must be strictly increasing.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let xs: Vec<BigRational> = self.xs.iter().map(|d| d.to_rational()).collect();
        let k = xs.partition_point(|v| v <= x).clamp(1, xs.len() - 1);
        let (x0, x1) = (&xs[k - 1], &xs[k]);
        let (y0, y1) = (self.ys[k - 1].to_rational(), self.ys[k].to_rational());
        if x1 == x0 {
            return y0;
        }
        &y0 + (&y1 - &y0) * (x - x0) / (x1 - x0)
    }

    /// Largest `|y_i - y_j| / |x_i - x_j|` over sample pairs.
    pub fn max_slope(&self) -> BigRational {
        let mut best = BigRational::zero();
        for i in 0..self.xs.len() {
            for j in 0..i {
                let dx = (&self.xs[i] - &self.xs[j]).abs();
                if dx.is_zero() {
                    continue;
                }
                let s = (&self.ys[i] - &self.ys[j]).abs().to_rational() / dx.to_rational();
                if s > best {
                    best = s;
                }
            }
        }
        best
    }
}

/// Factors a sampled non-decreasing surjection `phi` on the level-`m` grid
/// as `psi . chi^-1` with both maps 2-Lipschitz: `chi^-1` samples
/// `t -> (t + phi(t)) / 2` and `psi = phi . chi`.
pub fn lip2_factorize(phi: &[Dyadic]) -> Result<(SampledMap, SampledMap), FrechetError> {
    let n = phi.len();
    if n < 2 || !(n - 1).is_power_of_two() {
        return Err(FrechetError::BadCurve(format!("{n} samples; expected 2^m + 1")));
    }
    if !phi[0].is_zero() || phi[n - 1] != Dyadic::one() || phi.windows(2).any(|w| w[0] > w[1]) {
        return Err(FrechetError::NonMonotone);
    }
    let m = (n - 1).trailing_zeros() as i64;
    let ts: Vec<Dyadic> = (0..n).map(|i| Dyadic::ratio(i as i64, m)).collect();
    let tilde: Vec<Dyadic> = ts.iter().zip(phi).map(|(t, p)| (t + p).halve()).collect();
    let chi = SampledMap { xs: tilde.clone(), ys: ts };
    let psi = SampledMap { xs: tilde, ys: phi.to_vec() };
    Ok((psi, chi))
}

/// Largest deviation of `psi(chi^-1(t))` from `phi(t)` over the level-`k`
/// grid, with both sides interpolated linearly.
pub fn factorization_residual(phi: &[Dyadic], psi: &SampledMap, chi: &SampledMap, k: u32) -> BigRational {
    let m = (phi.len() - 1).trailing_zeros() as i64;
    let phi_map = SampledMap { xs: (0..phi.len()).map(|i| Dyadic::ratio(i as i64, m)).collect(), ys: phi.to_vec() };
    let chi_inv = SampledMap { xs: chi.ys.clone(), ys: chi.xs.clone() };
    let mut worst = BigRational::zero();
    for i in 0..=(1u64 << k) {
        let t = Dyadic::ratio(i as i64, k as i64).to_rational();
        let d = (psi.eval(&chi_inv.eval(&t)) - phi_map.eval(&t)).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}
