//! Names of points and of non-empty compact sets.
//!
//! A [`PointName`] answers a precision query `m` with a level-`m` index
//! whose point lies within `2^(-m)` of the named point. A [`SetName`]
//! answers with a finite set of level-`m` indices whose points are within
//! Hausdorff distance `2^(-m)` of the named set. Both are lazy, memoized and
//! safe to share between threads.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::{Dyadic, DyadicInterval};
use crate::spaces::{Coord, Point, PresentedSpace, SpaceError, SpaceId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("index set must be non-empty")]
    Empty,
    #[error("hyperspace code must be non-zero")]
    ZeroCode,
    #[error("point search failed at level {0}: the set name violates its covering contract")]
    SearchFailed(u32),
    #[error("not a singleton: level-{level} cover has diameter {diameter}")]
    NotSingleton { level: u32, diameter: String },
    #[error(
        "intersection cover is empty at level {level} (depth {depth}): the sets are disjoint or the depth is too small"
    )]
    EmptyIntersection { level: u32, depth: u32 },
    #[error(
        "preimage cover is empty at level {level} (depth {depth}): the preimage is empty or the depth is too small"
    )]
    EmptyPreimage { level: u32, depth: u32 },
    #[error("invalid fixture: {0}")]
    Fixture(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

type SetQuery = dyn Fn(u32) -> Result<Vec<u64>, NameError> + Send + Sync;
type PointQuery = dyn Fn(u32) -> Result<u64, NameError> + Send + Sync;
type LocalQuery = dyn Fn(&[Coord], &Dyadic, u32) -> Result<Vec<u64>, NameError> + Send + Sync;
/// Witness index lists keyed by the pair of levels they were computed at.
type WitnessCache = HashMap<(u32, u32), Arc<(Vec<u64>, HashSet<u64>)>>;

struct SetInner {
    space: PresentedSpace,
    standard: bool,
    query: Box<SetQuery>,
    local: Option<Box<LocalQuery>>,
    memo: Mutex<HashMap<u32, Arc<Vec<u64>>>>,
}

/// Name of a non-empty compact set: level `m` maps to a finite, sorted,
/// non-empty set of level-`m` indices.
#[derive(Clone)]
pub struct SetName(Arc<SetInner>);

impl fmt::Debug for SetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetName").field("space", &self.0.space.id()).field("standard", &self.0.standard).finish()
    }
}

impl SetName {
    /// Wraps a query function. The function may return indices in any order
    /// and with repetitions; results are normalized and cached.
    pub fn from_fn<F>(space: PresentedSpace, standard: bool, f: F) -> Self
    where
        F: Fn(u32) -> Result<Vec<u64>, NameError> + Send + Sync + 'static,
    {
        SetName(Arc::new(SetInner {
            space,
            standard,
            query: Box::new(f),
            local: None,
            memo: Mutex::new(HashMap::new()),
        }))
    }

    /// Like [`SetName::from_fn`], plus a localized query returning the
    /// level-`m` cover indices within distance `r` of a point. It must agree
    /// with filtering the full query; it only avoids building the full cover.
    pub fn from_fn_local<F, L>(space: PresentedSpace, standard: bool, f: F, local: L) -> Self
    where
        F: Fn(u32) -> Result<Vec<u64>, NameError> + Send + Sync + 'static,
        L: Fn(&[Coord], &Dyadic, u32) -> Result<Vec<u64>, NameError> + Send + Sync + 'static,
    {
        SetName(Arc::new(SetInner {
            space,
            standard,
            query: Box::new(f),
            local: Some(Box::new(local)),
            memo: Mutex::new(HashMap::new()),
        }))
    }

    pub fn space(&self) -> &PresentedSpace {
        &self.0.space
    }

    pub fn is_standard(&self) -> bool {
        self.0.standard
    }

    pub fn query(&self, m: u32) -> Result<Arc<Vec<u64>>, NameError> {
        if let Some(v) = self.0.memo.lock().unwrap().get(&m) {
            return Ok(v.clone());
        }
        let mut v = (self.0.query)(m)?;
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(NameError::Empty);
        }
        let count = self.0.space.checked_level_count(m)?;
        if let Some(&bad) = v.iter().find(|&&u| u >= count) {
            return Err(NameError::Contract(format!("index {bad} is not in level {m}")));
        }
        let v = Arc::new(v);
        self.0.memo.lock().unwrap().insert(m, v.clone());
        Ok(v)
    }

    /// The sorted level-`m` cover indices within distance `r` of `p`.
    pub fn query_near(&self, p: &[Coord], r: &Dyadic, m: u32) -> Result<Vec<u64>, NameError> {
        let space = &self.0.space;
        let mut v = match &self.0.local {
            Some(local) if !self.0.memo.lock().unwrap().contains_key(&m) => local(p, r, m)?,
            _ => self.query(m)?.iter().copied().filter(|&u| &space.distance(p, &space.point(u)) <= r).collect(),
        };
        v.sort_unstable();
        v.dedup();
        Ok(v)
    }

    pub fn points(&self, m: u32) -> Result<Vec<Point>, NameError> {
        Ok(self.query(m)?.iter().map(|&u| self.0.space.point(u)).collect())
    }

    /// A copy of this name carrying a different standard flag.
    pub fn with_standard(&self, standard: bool) -> SetName {
        let me = self.clone();
        SetName::from_fn(self.space().clone(), standard, move |m| Ok(me.query(m)?.to_vec()))
    }
}

struct PointInner {
    space: PresentedSpace,
    query: Box<PointQuery>,
    memo: Mutex<HashMap<u32, u64>>,
}

/// Name of a point: level `m` maps to an index within `2^(-m)` of it.
#[derive(Clone)]
pub struct PointName(Arc<PointInner>);

impl fmt::Debug for PointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointName").field("space", &self.0.space.id()).finish()
    }
}

impl PointName {
    pub fn from_fn<F>(space: PresentedSpace, f: F) -> Self
    where
        F: Fn(u32) -> Result<u64, NameError> + Send + Sync + 'static,
    {
        PointName(Arc::new(PointInner { space, query: Box::new(f), memo: Mutex::new(HashMap::new()) }))
    }

    /// The name `m -> locate(p, m)` of a concrete point.
    pub fn of_point(space: &PresentedSpace, p: Point) -> Result<Self, NameError> {
        space.check_arity(&p)?;
        let s = space.clone();
        Ok(PointName::from_fn(space.clone(), move |m| Ok(s.locate(&p, m))))
    }

    pub fn space(&self) -> &PresentedSpace {
        &self.0.space
    }

    pub fn query(&self, m: u32) -> Result<u64, NameError> {
        if let Some(&u) = self.0.memo.lock().unwrap().get(&m) {
            return Ok(u);
        }
        let u = (self.0.query)(m)?;
        if u >= self.0.space.checked_level_count(m)? {
            return Err(NameError::Contract(format!("point query returned index {u} outside level {m}")));
        }
        self.0.memo.lock().unwrap().insert(m, u);
        Ok(u)
    }

    pub fn point(&self, m: u32) -> Result<Point, NameError> {
        Ok(self.0.space.point(self.query(m)?))
    }
}

/// Below this many candidates a linear scan beats a ball query.
const SCAN_LIMIT: usize = 2048;

/// Is some element of `set` (all level-`level` indices) within distance `r`
/// of `p`? Uses a ball query when the set is large.
fn near_any(space: &PresentedSpace, p: &[Coord], list: &[u64], set: &HashSet<u64>, r: &Dyadic, level: u32) -> bool {
    if list.len() <= SCAN_LIMIT {
        list.iter().any(|&u| &space.distance(p, &space.point(u)) <= r)
    } else {
        space.ball(p, r, level).into_iter().any(|u| set.contains(&u))
    }
}

fn min_distance(space: &PresentedSpace, p: &[Coord], pts: &[Point]) -> Dyadic {
    pts.iter().map(|q| space.distance(p, q)).min().unwrap_or_else(|| space.diameter())
}

/// The whole space as a standard name: every level-`m` index.
pub fn space_as_name(space: &PresentedSpace) -> SetName {
    let (s, s2) = (space.clone(), space.clone());
    SetName::from_fn_local(space.clone(), true, move |m| Ok(s.enumerate(m)), move |p, r, m| Ok(s2.ball(p, r, m)))
}

pub fn union(a: &SetName, b: &SetName) -> Result<SetName, NameError> {
    a.space().same_as(b.space())?;
    let (a2, b2) = (a.clone(), b.clone());
    Ok(SetName::from_fn(a.space().clone(), a.is_standard() && b.is_standard(), move |m| {
        let mut v = a2.query(m)?.to_vec();
        v.extend(b2.query(m)?.iter());
        Ok(v)
    }))
}

/// Standard name for the set denoted by `a`: level `m` keeps every level-`m`
/// point strictly closer than `7 * 2^(-m-3)` to the level-`(m+3)` cover.
pub fn standardize(a: &SetName) -> SetName {
    let src = a.clone();
    let space = a.space().clone();
    SetName::from_fn(a.space().clone(), true, move |m| {
        let fine = src.query(m + 3)?;
        let r = Dyadic::ratio(7, m as i64 + 3);
        let mut out = BTreeSet::new();
        for &u in fine.iter() {
            let p = space.point(u);
            for v in space.ball(&p, &r, m) {
                if !out.contains(&v) && space.distance(&p, &space.point(v)) < r {
                    out.insert(v);
                }
            }
        }
        Ok(out.into_iter().collect())
    })
}

/// A point of the named set, found by the ascending search for a chain
/// `a_k` in the level-`(k+2)` covers with
/// `d(a_k, a_n) < 2^(-k-1) + 2^(-n-1)`, reported as `round(a_m, m)`.
pub fn select_point(a: &SetName) -> PointName {
    let src = a.clone();
    let space = a.space().clone();
    let chain: Mutex<Vec<u64>> = Mutex::new(Vec::new());
    PointName::from_fn(a.space().clone(), move |m| {
        let mut chain = chain.lock().unwrap();
        while chain.len() <= m as usize {
            let k = chain.len() as u32;
            let prev: Vec<Point> = chain.iter().map(|&u| space.point(u)).collect();
            let cover = src.query(k + 2)?;
            let found = cover.iter().copied().find(|&c| {
                let p = space.point(c);
                prev.iter()
                    .enumerate()
                    .all(|(n, q)| space.distance(&p, q) < &Dyadic::pow2(k as i64 + 1) + &Dyadic::pow2(n as i64 + 1))
            });
            match found {
                Some(c) => chain.push(c),
                None => return Err(NameError::SearchFailed(k)),
            }
        }
        Ok(space.round(chain[m as usize], m))
    })
}

/// The singleton `{x}` named by `A_m = {u_m}`.
pub fn point_to_singleton(x: &PointName) -> SetName {
    let x2 = x.clone();
    SetName::from_fn(x.space().clone(), false, move |m| Ok(vec![x2.query(m)?]))
}

/// Recovers the point of a singleton name. Fails when the level-`(m+3)`
/// cover is too wide to come from a single point.
pub fn singleton_to_point(a: &SetName) -> PointName {
    let src = a.clone();
    let space = a.space().clone();
    PointName::from_fn(a.space().clone(), move |m| {
        let cover = src.query(m + 3)?;
        let pts: Vec<Point> = cover.iter().map(|&u| space.point(u)).collect();
        let limit = Dyadic::pow2(m as i64 + 2);
        let mut diameter = Dyadic::zero();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                diameter = diameter.max_with(&space.distance(&pts[i], &pts[j]));
            }
        }
        let not_single = || NameError::NotSingleton { level: m + 3, diameter: diameter.to_string() };
        if diameter > limit {
            return Err(not_single());
        }
        let cand = space
            .ball(&pts[0], &limit, m + 3)
            .into_iter()
            .find(|&c| {
                let p = space.point(c);
                pts.iter().all(|q| space.distance(&p, q) < limit)
            })
            .ok_or_else(not_single)?;
        Ok(space.round(cand, m))
    })
}

/// One-sided intersection: keeps `c` in `A_m` when, for all `n, n' <= depth`,
/// some `a` in `A_n` and `b` in `B_n'` satisfy `d(a,b) <= 2^-n + 2^-n'`
/// and `d(c,a) <= 2^-n + 2^-m`.
pub fn intersect_truncated(a: &SetName, b: &SetName, depth: u32) -> Result<SetName, NameError> {
    a.space().same_as(b.space())?;
    let (a2, b2) = (a.clone(), b.clone());
    let space = a.space().clone();
    // witnesses W(n, n') = {a in A_n : some b in B_n' is close}; independent of m
    let witnesses: Arc<Mutex<WitnessCache>> = Arc::new(Mutex::new(HashMap::new()));
    Ok(SetName::from_fn(a.space().clone(), false, move |m| {
        let mut keep: Vec<u64> = a2.query(m)?.to_vec();
        for n in 0..=depth {
            for n2 in 0..=depth {
                let w = {
                    let cached = witnesses.lock().unwrap().get(&(n, n2)).cloned();
                    match cached {
                        Some(w) => w,
                        None => {
                            let an = a2.query(n)?;
                            let bn = b2.query(n2)?;
                            let bset: HashSet<u64> = bn.iter().copied().collect();
                            let r = &Dyadic::pow2(n as i64) + &Dyadic::pow2(n2 as i64);
                            let list: Vec<u64> = an
                                .iter()
                                .copied()
                                .filter(|&u| near_any(&space, &space.point(u), &bn, &bset, &r, n2))
                                .collect();
                            let set = list.iter().copied().collect();
                            let w = Arc::new((list, set));
                            witnesses.lock().unwrap().insert((n, n2), w.clone());
                            w
                        }
                    }
                };
                let r = &Dyadic::pow2(n as i64) + &Dyadic::pow2(m as i64);
                keep.retain(|&c| near_any(&space, &space.point(c), &w.0, &w.1, &r, n));
                if keep.is_empty() {
                    return Err(NameError::EmptyIntersection { level: m, depth });
                }
            }
        }
        Ok(keep)
    }))
}

/// Exact Hausdorff distance between two finite point sets.
pub fn finite_hausdorff(space: &PresentedSpace, a: &[Point], b: &[Point]) -> Dyadic {
    let dir = |x: &[Point], y: &[Point]| x.iter().map(|p| min_distance(space, p, y)).max().unwrap_or_else(Dyadic::zero);
    dir(a, b).max_with(&dir(b, a))
}

/// Enclosure of width `2^(-n)` of the Hausdorff distance between the sets
/// denoted by `a` and `b`, from their level-`(n+2)` covers.
pub fn hausdorff_between(a: &SetName, b: &SetName, n: u32) -> Result<DyadicInterval, NameError> {
    a.space().same_as(b.space())?;
    let m = n + 2;
    let h = finite_hausdorff(a.space(), &a.points(m)?, &b.points(m)?);
    let slack = Dyadic::pow2(m as i64 - 1);
    let lo = (&h - &slack).max_with(&Dyadic::zero());
    Ok(DyadicInterval::new(lo, &h + &slack).expect("ordered"))
}

/// Hyperspace code of a finite index set: the sum of `2^j` over its members.
pub fn hyper_encode(set: &[u64]) -> Result<BigUint, NameError> {
    if set.is_empty() {
        return Err(NameError::Empty);
    }
    let mut h = BigUint::zero();
    for &j in set {
        h.set_bit(j, true);
    }
    Ok(h)
}

pub fn hyper_decode(h: &BigUint) -> Result<Vec<u64>, NameError> {
    if h.is_zero() {
        return Err(NameError::ZeroCode);
    }
    Ok((0..h.bits()).filter(|&j| h.bit(j)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Finite,
    IntervalHull,
}

/// A compact set with an exact distance oracle, read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetFixture {
    pub space: SpaceId,
    pub kind: FixtureKind,
    pub points: Vec<Vec<String>>,
}

/// A parsed fixture, ready to produce names and oracle distances.
#[derive(Debug, Clone)]
pub struct OracleSet {
    space: PresentedSpace,
    kind: FixtureKind,
    points: Vec<Point>,
    /// Per-coordinate bounds of an interval hull.
    bounds: Vec<(Dyadic, Dyadic)>,
    leaves: Vec<SpaceId>,
}

fn leaf_ids(space: &PresentedSpace) -> Vec<SpaceId> {
    match space.factors() {
        Some((x, y)) => {
            let mut v = leaf_ids(&x);
            v.extend(leaf_ids(&y));
            v
        }
        None => vec![space.id()],
    }
}

impl OracleSet {
    pub fn new(space: &PresentedSpace, kind: FixtureKind, points: Vec<Point>) -> Result<Self, NameError> {
        if points.is_empty() {
            return Err(NameError::Fixture("no points".into()));
        }
        for p in &points {
            space.check_arity(p)?;
        }
        let leaves = leaf_ids(space);
        let mut bounds = Vec::new();
        if kind == FixtureKind::IntervalHull {
            if leaves.iter().any(|l| !matches!(l, SpaceId::Interval | SpaceId::Circle)) {
                return Err(NameError::Fixture("interval hulls need real coordinates".into()));
            }
            for i in 0..space.arity() {
                let col: Vec<&Dyadic> = points.iter().map(|p| p[i].real().unwrap()).collect();
                let lo = col.iter().copied().min().unwrap().clone();
                let hi = col.iter().copied().max().unwrap().clone();
                if lo.is_negative() || hi > Dyadic::one() {
                    return Err(NameError::Fixture(format!("coordinate range [{lo}, {hi}] leaves [0,1]")));
                }
                bounds.push((lo, hi));
            }
        }
        Ok(OracleSet { space: space.clone(), kind, points, bounds, leaves })
    }

    pub fn from_fixture(f: &SetFixture) -> Result<Self, NameError> {
        let space = f.space.build()?;
        let mut pts = Vec::new();
        for row in &f.points {
            pts.push(row.iter().map(|s| Coord::parse(s)).collect::<Result<Point, _>>()?);
        }
        OracleSet::new(&space, f.kind, pts)
    }

    pub fn finite(space: &PresentedSpace, points: Vec<Point>) -> Result<Self, NameError> {
        OracleSet::new(space, FixtureKind::Finite, points)
    }

    /// The box `[lo_i, hi_i]` given by its two corners.
    pub fn hull(space: &PresentedSpace, lo: Point, hi: Point) -> Result<Self, NameError> {
        OracleSet::new(space, FixtureKind::IntervalHull, vec![lo, hi])
    }

    pub fn space(&self) -> &PresentedSpace {
        &self.space
    }

    pub fn kind(&self) -> FixtureKind {
        self.kind
    }

    pub fn defining_points(&self) -> &[Point] {
        &self.points
    }

    pub fn bounds(&self) -> &[(Dyadic, Dyadic)] {
        &self.bounds
    }

    /// Exact distance from `p` to the set.
    pub fn distance_to(&self, p: &[Coord]) -> Dyadic {
        match self.kind {
            FixtureKind::Finite => min_distance(&self.space, p, &self.points),
            FixtureKind::IntervalHull => {
                let mut worst = Dyadic::zero();
                for (i, (lo, hi)) in self.bounds.iter().enumerate() {
                    let x = p[i].real().expect("real coordinate");
                    let d = if x >= lo && x <= hi {
                        Dyadic::zero()
                    } else if self.leaves[i] == SpaceId::Circle {
                        let c = crate::spaces::circle();
                        let px = [Coord::Real(x.clone())];
                        c.distance(&px, &[Coord::Real(lo.clone())])
                            .min_with(&c.distance(&px, &[Coord::Real(hi.clone())]))
                    } else if x < lo {
                        lo - x
                    } else {
                        x - hi
                    };
                    worst = worst.max_with(&d);
                }
                worst
            }
        }
    }

    /// Level-`m` indices within distance `r` of the set.
    pub fn neighbourhood(&self, r: &Dyadic, m: u32) -> Vec<u64> {
        match self.kind {
            FixtureKind::Finite => {
                let mut out = BTreeSet::new();
                for p in &self.points {
                    out.extend(self.space.ball(p, r, m));
                }
                out.into_iter().collect()
            }
            FixtureKind::IntervalHull => {
                let lo: Vec<Dyadic> = self.bounds.iter().map(|b| b.0.clone()).collect();
                let hi: Vec<Dyadic> = self.bounds.iter().map(|b| b.1.clone()).collect();
                self.space.box_query(&lo, &hi, r, m).expect("real-coordinate space")
            }
        }
    }

    /// The standard name: level `m` holds the indices within `2^(-m-1)`.
    pub fn name(&self) -> SetName {
        let me = self.clone();
        SetName::from_fn(self.space.clone(), true, move |m| Ok(me.neighbourhood(&Dyadic::pow2(m as i64 + 1), m)))
    }

    /// Points of the set, spaced at most `2^(-level)` apart (exact for
    /// finite sets).
    pub fn samples(&self, level: u32) -> Vec<Point> {
        match self.kind {
            FixtureKind::Finite => self.points.clone(),
            FixtureKind::IntervalHull => {
                let mut acc: Vec<Vec<Dyadic>> = vec![Vec::new()];
                for (lo, hi) in &self.bounds {
                    let mut axis = vec![lo.clone()];
                    let step = Dyadic::pow2(level as i64);
                    let mut x = lo.ceil_to(level as i64);
                    while &x < hi {
                        if &x > lo {
                            axis.push(x.clone());
                        }
                        x = &x + &step;
                    }
                    if hi != lo {
                        axis.push(hi.clone());
                    }
                    acc = acc
                        .into_iter()
                        .flat_map(|pre| {
                            axis.iter().map(move |v| {
                                let mut q = pre.clone();
                                q.push(v.clone());
                                q
                            })
                        })
                        .collect();
                }
                acc.into_iter().map(|v| v.into_iter().map(Coord::Real).collect()).collect()
            }
        }
    }
}

/// Outcome of a name validation at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCheck {
    pub level: u32,
    pub ok: bool,
    pub detail: String,
}

/// Checks the Hausdorff bound `2^(-m)` between the level-`m` cover and the
/// oracle set. The set side is probed through samples spaced
/// `2^(-m-sample_gap)` apart, which adds that spacing as slack.
pub fn check_cover(name: &SetName, oracle: &OracleSet, m: u32, sample_gap: u32) -> Result<LevelCheck, NameError> {
    let space = name.space();
    let bound = Dyadic::pow2(m as i64);
    let pts = name.points(m)?;
    let far = pts.iter().map(|p| oracle.distance_to(p)).max().unwrap_or_else(Dyadic::zero);
    let samples = oracle.samples(m + sample_gap);
    let slack =
        if oracle.kind() == FixtureKind::Finite { Dyadic::zero() } else { Dyadic::pow2((m + sample_gap) as i64) };
    let miss = samples.iter().map(|s| min_distance(space, s, &pts)).max().unwrap_or_else(Dyadic::zero);
    let ok = far <= bound && miss <= &bound + &slack;
    Ok(LevelCheck { level: m, ok, detail: format!("cover-to-set {far}, set-to-cover {miss}") })
}

/// Checks both standard-name window inequalities over the whole level.
pub fn check_standard(name: &SetName, oracle: &OracleSet, m: u32) -> Result<LevelCheck, NameError> {
    let space = name.space();
    let cover: HashSet<u64> = name.query(m)?.iter().copied().collect();
    let inner = Dyadic::pow2(m as i64 + 1);
    let outer = Dyadic::pow2(m as i64);
    for u in space.enumerate(m) {
        let d = oracle.distance_to(&space.point(u));
        let inside = cover.contains(&u);
        if inside && d >= outer {
            return Ok(LevelCheck { level: m, ok: false, detail: format!("index {u} kept at distance {d}") });
        }
        if !inside && d <= inner {
            return Ok(LevelCheck { level: m, ok: false, detail: format!("index {u} dropped at distance {d}") });
        }
    }
    Ok(LevelCheck { level: m, ok: true, detail: format!("{} indices", cover.len()) })
}

/// Checks `d(u_m, u_n) <= 2^-m + 2^-n` for all `m, n <= up_to`.
pub fn check_point_consistency(x: &PointName, up_to: u32) -> Result<LevelCheck, NameError> {
    let space = x.space();
    let pts: Vec<Point> = (0..=up_to).map(|m| x.point(m)).collect::<Result<_, _>>()?;
    for m in 0..=up_to as usize {
        for n in 0..m {
            let d = space.distance(&pts[m], &pts[n]);
            if d > &Dyadic::pow2(m as i64) + &Dyadic::pow2(n as i64) {
                return Ok(LevelCheck {
                    level: m as u32,
                    ok: false,
                    detail: format!("levels {m},{n} at distance {d}"),
                });
            }
        }
    }
    Ok(LevelCheck { level: up_to, ok: true, detail: String::new() })
}
