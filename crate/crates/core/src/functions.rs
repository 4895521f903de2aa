//! Continuous functions as evaluator objects and as names of their graphs.
//!
//! A [`FunctionObject`] carries a domain name, a codomain space, a modulus
//! `mu` and the finite maps `(n, a) -> b`: for a domain index `a` at level
//! `mu(n)` they return a level-`n` codomain index within `2^(-n)` of the
//! value at every domain point within `2^(-mu(n))` of `a`. A [`GraphName`]
//! is a set name over the product space denoting the graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::names::{space_as_name, standardize, NameError, PointName, SetName};
use crate::spaces::{pair, product, unpair, Coord, Point, PresentedSpace, SpaceError};

type Fibres = BTreeMap<u64, Vec<u64>>;
type NearFn = dyn Fn(&[Coord], &Dyadic, u32) -> Result<Vec<u64>, FunctionError> + Send + Sync;

/// Default cap on the precision levels scanned by searches.
pub const DEFAULT_LEVEL_CAP: u32 = 24;

/// The level cap, overridable through `CMS_LEVEL_CAP`.
pub fn level_cap() -> u32 {
    std::env::var("CMS_LEVEL_CAP").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_LEVEL_CAP)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionError {
    #[error(transparent)]
    Name(#[from] NameError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("evaluation search reached the level cap {cap} without a certified value (contract violation or point outside the domain)")]
    LevelCap { cap: u32 },
    #[error("no graph point lies near the argument at level {level}: the point is outside the domain")]
    OutsideDomain { level: u32 },
    #[error("no modulus found up to level cap {cap}")]
    ModulusCap { cap: u32 },
    #[error("graph does not live on a product space")]
    NotAGraph,
}

/// A non-decreasing map `n -> mu(n)` on precisions.
#[derive(Clone)]
pub struct ModulusFn(Arc<dyn Fn(u32) -> u32 + Send + Sync>);

impl fmt::Debug for ModulusFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<u32> = (0..6).map(|n| self.at(n)).collect();
        write!(f, "ModulusFn{head:?}")
    }
}

impl ModulusFn {
    pub fn new<F: Fn(u32) -> u32 + Send + Sync + 'static>(f: F) -> Self {
        ModulusFn(Arc::new(f))
    }

    /// `n -> max(0, n + k)`
    pub fn shift(k: i64) -> Self {
        ModulusFn::new(move |n| (n as i64 + k).max(0) as u32)
    }

    pub fn constant(c: u32) -> Self {
        ModulusFn::new(move |_| c)
    }

    /// The modulus of an `L`-Lipschitz map: `n + ceil(log2 L)`, and the
    /// constant zero when `L = 0`.
    pub fn from_lipschitz(l: &Dyadic) -> Self {
        match l.log2_ceil() {
            None => ModulusFn::constant(0),
            Some(e) => ModulusFn::shift(e),
        }
    }

    pub fn at(&self, n: u32) -> u32 {
        (self.0)(n)
    }

    /// `n -> self(inner(n))`
    pub fn after(&self, inner: &ModulusFn) -> ModulusFn {
        let (a, b) = (self.clone(), inner.clone());
        ModulusFn::new(move |n| a.at(b.at(n)))
    }
}

type FiniteMap = dyn Fn(u32, u64) -> u64 + Send + Sync;
type Evaluator = dyn Fn(&[Coord]) -> Point + Send + Sync;

/// An equicontinuous function given by its finite maps.
#[derive(Clone)]
pub struct FunctionObject {
    domain: SetName,
    codomain: PresentedSpace,
    modulus: ModulusFn,
    map: Arc<FiniteMap>,
    exact: Option<Arc<Evaluator>>,
}

impl fmt::Debug for FunctionObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionObject")
            .field("domain", &self.domain.space().id())
            .field("codomain", &self.codomain.id())
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl FunctionObject {
    pub fn new<F>(domain: SetName, codomain: PresentedSpace, modulus: ModulusFn, map: F) -> Self
    where
        F: Fn(u32, u64) -> u64 + Send + Sync + 'static,
    {
        FunctionObject { domain, codomain, modulus, map: Arc::new(map), exact: None }
    }

    /// Attach an exact pointwise evaluator, used as a test oracle.
    pub fn with_exact<F>(mut self, f: F) -> Self
    where
        F: Fn(&[Coord]) -> Point + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(f));
        self
    }

    pub fn domain(&self) -> &SetName {
        &self.domain
    }

    pub fn domain_space(&self) -> &PresentedSpace {
        self.domain.space()
    }

    pub fn codomain(&self) -> &PresentedSpace {
        &self.codomain
    }

    pub fn modulus(&self) -> &ModulusFn {
        &self.modulus
    }

    /// `Lambda^mu_n(a)` for a domain index `a` at level `mu(n)`.
    pub fn finite_map(&self, n: u32, a: u64) -> u64 {
        (self.map)(n, a)
    }

    /// Exact value at a domain point when an evaluator is attached.
    pub fn exact(&self, p: &[Coord]) -> Option<Point> {
        self.exact.as_ref().map(|f| f(p))
    }

    /// A level-`n` codomain index within `2^(-n)` of the value at `x`.
    pub fn eval(&self, x: &PointName, n: u32) -> Result<u64, FunctionError> {
        Ok(self.finite_map(n, x.query(self.modulus.at(n))?))
    }

    /// The same function on a smaller domain name.
    pub fn on_domain(&self, domain: SetName) -> Result<Self, FunctionError> {
        domain.space().same_as(self.domain_space())?;
        Ok(FunctionObject { domain, ..self.clone() })
    }
}

/// `x -> x` with modulus `n + 1`.
pub fn identity(domain: &SetName) -> FunctionObject {
    let s = domain.space().clone();
    FunctionObject::new(domain.clone(), s.clone(), ModulusFn::shift(1), move |n, a| s.round(a, n))
        .with_exact(|p| p.to_vec())
}

/// The constant function with value `c`.
pub fn constant(domain: &SetName, codomain: &PresentedSpace, c: Point) -> Result<FunctionObject, FunctionError> {
    codomain.check_arity(&c)?;
    let y = codomain.clone();
    let c2 = c.clone();
    Ok(FunctionObject::new(domain.clone(), codomain.clone(), ModulusFn::constant(0), move |n, _| y.locate(&c2, n))
        .with_exact(move |_| c.clone()))
}

/// Projection of a product domain onto its first or second factor.
pub fn projection(domain: &SetName, second: bool) -> Result<FunctionObject, FunctionError> {
    let s = domain.space().clone();
    let (x, y) = s.factors().ok_or(FunctionError::NotAGraph)?;
    let target = if second { y.clone() } else { x.clone() };
    let t2 = target.clone();
    let split = x.arity();
    let s2 = s.clone();
    Ok(FunctionObject::new(domain.clone(), target, ModulusFn::shift(1), move |n, w| {
        let (u, v) = unpair(&s2, w).unwrap();
        t2.round(if second { v } else { u }, n)
    })
    .with_exact(move |p| if second { p[split..].to_vec() } else { p[..split].to_vec() }))
}

/// `x -> g(f(x))` with modulus `mu_f . mu_g`.
pub fn compose(f: &FunctionObject, g: &FunctionObject) -> FunctionObject {
    let (f2, g2) = (f.clone(), g.clone());
    let modulus = f.modulus.after(&g.modulus);
    let mut h = FunctionObject::new(f.domain.clone(), g.codomain.clone(), modulus, move |n, a| {
        let mid = g2.modulus.at(n);
        g2.finite_map(n, f2.finite_map(mid, a))
    });
    if let (Some(fe), Some(ge)) = (f.exact.clone(), g.exact.clone()) {
        h = h.with_exact(move |p| ge(&fe(p)));
    }
    h
}

/// `y -> F(x, y)` for a function on a product domain and a fixed `x`.
pub fn curry(f: &FunctionObject, x: &PointName) -> Result<FunctionObject, FunctionError> {
    let s = f.domain_space().clone();
    let (xs, ys) = s.factors().ok_or(FunctionError::NotAGraph)?;
    x.space().same_as(&xs)?;
    let (f2, x2) = (f.clone(), x.clone());
    let s2 = s.clone();
    let mu = f.modulus.clone();
    let mut out = FunctionObject::new(space_as_name(&ys), f.codomain.clone(), mu.clone(), move |n, b| {
        let u = x2.query(mu.at(n)).expect("point name query");
        f2.finite_map(n, pair(&s2, u, b).unwrap())
    });
    if let Some(fe) = f.exact.clone() {
        // the exact evaluator needs a concrete x; use a deep approximation
        let xp = x.point(40).ok();
        if let Some(xp) = xp {
            out = out.with_exact(move |p| {
                let mut q = xp.clone();
                q.extend(p.iter().cloned());
                fe(&q)
            });
        }
    }
    Ok(out)
}

struct GraphInner {
    name: SetName,
    domain: PresentedSpace,
    codomain: PresentedSpace,
    modulus: Option<ModulusFn>,
    /// Per level: first-coordinate index -> second-coordinate indices.
    fibres: Mutex<HashMap<u32, Arc<Fibres>>>,
    /// Second coordinates of the level-`m` cover points whose first
    /// coordinate is within `r` of a point, without the full cover.
    near: Option<Box<NearFn>>,
}

/// A set name over `X x Y` denoting the graph of a function.
#[derive(Clone)]
pub struct GraphName(Arc<GraphInner>);

impl fmt::Debug for GraphName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphName").field("space", &self.0.name.space().id()).finish()
    }
}

impl GraphName {
    pub fn new(name: SetName, modulus: Option<ModulusFn>) -> Result<Self, FunctionError> {
        let (x, y) = name.space().factors().ok_or(FunctionError::NotAGraph)?;
        Ok(GraphName(Arc::new(GraphInner {
            name,
            domain: x,
            codomain: y,
            modulus,
            fibres: Mutex::new(HashMap::new()),
            near: None,
        })))
    }

    fn with_near<N>(self, near: N) -> Self
    where
        N: Fn(&[Coord], &Dyadic, u32) -> Result<Vec<u64>, FunctionError> + Send + Sync + 'static,
    {
        let inner = Arc::try_unwrap(self.0).unwrap_or_else(|_| unreachable!("fresh graph name"));
        GraphName(Arc::new(GraphInner { near: Some(Box::new(near)), ..inner }))
    }

    pub fn name(&self) -> &SetName {
        &self.0.name
    }

    pub fn domain_space(&self) -> &PresentedSpace {
        &self.0.domain
    }

    pub fn codomain(&self) -> &PresentedSpace {
        &self.0.codomain
    }

    pub fn modulus(&self) -> Option<&ModulusFn> {
        self.0.modulus.as_ref()
    }

    /// The level-`m` cover grouped by first coordinate.
    pub fn fibres(&self, m: u32) -> Result<Arc<BTreeMap<u64, Vec<u64>>>, FunctionError> {
        if let Some(f) = self.0.fibres.lock().unwrap().get(&m) {
            return Ok(f.clone());
        }
        let cover = self.0.name.query(m)?;
        let mut map: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &w in cover.iter() {
            let (u, v) = unpair(self.0.name.space(), w).unwrap();
            map.entry(u).or_default().push(v);
        }
        let map = Arc::new(map);
        self.0.fibres.lock().unwrap().insert(m, map.clone());
        Ok(map)
    }

    /// Second coordinates of level-`m` cover points whose first coordinate
    /// lies within `r` of `p`.
    fn values_near(&self, p: &[Coord], r: &Dyadic, m: u32) -> Result<Vec<u64>, FunctionError> {
        if let Some(near) = &self.0.near {
            let mut v = near(p, r, m)?;
            v.sort_unstable();
            v.dedup();
            return Ok(v);
        }
        let fib = self.fibres(m)?;
        let mut out = BTreeSet::new();
        let near = self.0.domain.ball(p, r, m);
        if near.len() <= fib.len() {
            for u in near {
                if let Some(vs) = fib.get(&u) {
                    out.extend(vs.iter().copied());
                }
            }
        } else {
            for (&u, vs) in fib.iter() {
                if &self.0.domain.distance(p, &self.0.domain.point(u)) <= r {
                    out.extend(vs.iter().copied());
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// The graph name built from the finite maps: level `m` pairs
/// `round(u, m)` with `round(Lambda_{m+2}(u), m)` over the domain cover at
/// level `max(mu(m+2), m+1)`.
pub fn graph_from_function(f: &FunctionObject) -> GraphName {
    let xy = product(f.domain_space(), f.codomain());
    let f2 = f.clone();
    let xy2 = xy.clone();
    let name = SetName::from_fn(xy, false, move |m| {
        let level = f2.modulus.at(m + 2).max(m + 1);
        let cover = f2.domain.query(level)?;
        let x = f2.domain_space();
        let y = f2.codomain();
        Ok(cover.iter().map(|&u| pair(&xy2, x.round(u, m), y.round(f2.finite_map(m + 2, u), m)).unwrap()).collect())
    });
    let f3 = f.clone();
    let near = move |p: &[Coord], r: &Dyadic, m: u32| -> Result<Vec<u64>, FunctionError> {
        let level = f3.modulus.at(m + 2).max(m + 1);
        let (x, y) = (f3.domain_space(), f3.codomain());
        // rounding to level m moves a point by at most 2^(-m-1)
        let reach = r + &Dyadic::pow2(m as i64 + 1);
        let mut out = Vec::new();
        for u in f3.domain.query_near(p, &reach, level)? {
            let ru = x.round(u, m);
            if &x.distance(p, &x.point(ru)) <= r {
                out.push(y.round(f3.finite_map(m + 2, u), m));
            }
        }
        Ok(out)
    };
    GraphName::new(name, Some(f.modulus.clone())).expect("product space").with_near(near)
}

/// Evaluates the function denoted by `g` at `x` to precision `n`: searches
/// levels `m` upward for a level-`n` index `v` with
/// `e(v, v') < 2^-n - 2^-m` for every cover pair `(u', v')` whose first
/// coordinate is within `2^(-m+1)` of `x`'s level-`m` approximation.
pub fn eval_from_graph(g: &GraphName, x: &PointName, n: u32) -> Result<u64, FunctionError> {
    eval_from_graph_capped(g, x, n, level_cap().max(n + 3))
}

pub fn eval_from_graph_capped(g: &GraphName, x: &PointName, n: u32, cap: u32) -> Result<u64, FunctionError> {
    x.space().same_as(g.domain_space())?;
    let y = g.codomain();
    for m in (n + 1)..=cap {
        let um = x.point(m)?;
        let vals = g.values_near(&um, &Dyadic::pow2(m as i64 - 1), m)?;
        if vals.is_empty() {
            return Err(FunctionError::OutsideDomain { level: m });
        }
        let tol = &Dyadic::pow2(n as i64) - &Dyadic::pow2(m as i64);
        let vpts: Vec<Point> = vals.iter().map(|&v| y.point(v)).collect();
        let cands = y.ball(&vpts[0], &Dyadic::pow2(n as i64), n);
        if let Some(v) = cands.into_iter().find(|&c| {
            let cp = y.point(c);
            vpts.iter().all(|q| y.distance(&cp, q) < tol)
        }) {
            return Ok(v);
        }
    }
    Err(FunctionError::LevelCap { cap })
}

/// Smallest `m <= cap` such that level-`(m+2)` cover points whose first
/// coordinates are within `2^(-m)` have second coordinates within
/// `2^(-n) + 4 * 2^(-m-2)`.
pub fn modulus_from_graph(g: &GraphName, n: u32, cap: u32) -> Result<u32, FunctionError> {
    let x = g.domain_space();
    let y = g.codomain();
    'levels: for m in 0..=cap {
        let fib = g.fibres(m + 2)?;
        let r = Dyadic::pow2(m as i64);
        let tol = &Dyadic::pow2(n as i64) + &Dyadic::pow2(m as i64);
        for (&u, vs) in fib.iter() {
            let near = g.values_near(&x.point(u), &r, m + 2)?;
            let (lo, hi) = (vs.iter(), near.iter());
            for &v in lo {
                let vp = y.point(v);
                for &w in hi.clone() {
                    if y.distance(&vp, &y.point(w)) > tol {
                        continue 'levels;
                    }
                }
            }
        }
        return Ok(m);
    }
    Err(FunctionError::ModulusCap { cap })
}

/// A binary modulus of continuity derived from the graph:
/// `n -> max(m(n+1), n+2) + 1` with `m` from [`modulus_from_graph`].
pub fn derived_modulus(g: &GraphName, n: u32, cap: u32) -> Result<u32, FunctionError> {
    Ok(modulus_from_graph(g, n + 1, cap)?.max(n + 2) + 1)
}

/// The graph of the restriction to `v`:
/// pairs `(round(u,m), round(w,m))` of the standardized graph cover at level
/// `mu(m+2)+1` whose first coordinate lies in the standardized cover of `v`.
pub fn restrict(g: &GraphName, v: &SetName) -> Result<GraphName, FunctionError> {
    v.space().same_as(g.domain_space())?;
    let gs = if g.name().is_standard() { g.name().clone() } else { standardize(g.name()) };
    let gs = GraphName::new(gs, g.modulus().cloned())?;
    let vs = if v.is_standard() { v.clone() } else { standardize(v) };
    let g_for_mod = g.clone();
    let modulus = g.modulus().cloned();
    let xy = g.name().space().clone();
    let xy2 = xy.clone();
    let gs2 = gs.clone();
    let name = SetName::from_fn(xy, false, move |m| {
        let mu = match &modulus {
            Some(mu) => mu.at(m + 2),
            None => derived_modulus(&g_for_mod, m + 2, level_cap()).map_err(|e| NameError::Contract(e.to_string()))?,
        };
        let level = (mu + 1).max(m + 2);
        let dom: HashSet<u64> = vs.query(level)?.iter().copied().collect();
        let fib = gs2.fibres(level).map_err(|e| NameError::Contract(e.to_string()))?;
        let x = gs2.domain_space();
        let y = gs2.codomain();
        let mut out = Vec::new();
        for (&u, ws) in fib.iter() {
            if dom.contains(&u) {
                for &w in ws {
                    out.push(pair(&xy2, x.round(u, m), y.round(w, m)).unwrap());
                }
            }
        }
        Ok(out)
    });
    GraphName::new(name, g.modulus().cloned())
}

/// The image `Lambda[W]`: level `m` is `{Lambda_m(a) : a in A_mu(m)}`.
pub fn image(f: &FunctionObject) -> SetName {
    let f2 = f.clone();
    SetName::from_fn(f.codomain().clone(), false, move |m| {
        let cover = f2.domain.query(f2.modulus.at(m))?;
        Ok(cover.iter().map(|&a| f2.finite_map(m, a)).collect())
    })
}

/// One-sided preimage `Lambda^-1[V]` with the universal quantifiers over
/// precisions `n, n'` truncated at `depth`. The true preimage always lies
/// within `2^(-m)` of the level-`m` cover; spurious points recede as the
/// depth grows when the map is open and `V` is regular.
pub fn preimage_regular(f: &FunctionObject, v: &SetName, depth: u32) -> Result<SetName, FunctionError> {
    v.space().same_as(f.codomain())?;
    let f2 = f.clone();
    let v2 = v.clone();
    type Witness = Arc<Vec<u64>>;
    let cache: Arc<Mutex<HashMap<(u32, u32), Witness>>> = Arc::new(Mutex::new(HashMap::new()));
    let name = SetName::from_fn(f.domain_space().clone(), false, move |m| {
        let x = f2.domain_space().clone();
        let y = f2.codomain().clone();
        let mut keep: Option<BTreeSet<u64>> = None;
        // pairs ordered finest first so the candidate set shrinks early
        for n in (0..=depth).rev() {
            for n2 in (0..=depth).rev() {
                let w = {
                    let hit = cache.lock().unwrap().get(&(n, n2)).cloned();
                    match hit {
                        Some(w) => w,
                        None => {
                            let bn = v2.query(n)?;
                            let bset: HashSet<u64> = bn.iter().copied().collect();
                            let r = &Dyadic::pow2(n as i64) + &Dyadic::pow2(n2 as i64);
                            let dom = f2.domain.query(f2.modulus.at(n2))?;
                            let w: Vec<u64> = dom
                                .iter()
                                .copied()
                                .filter(|&a| {
                                    let yp = y.point(f2.finite_map(n2, a));
                                    if bn.len() <= 2048 {
                                        bn.iter().any(|&b| y.distance(&yp, &y.point(b)) <= r)
                                    } else {
                                        y.ball(&yp, &r, n).into_iter().any(|b| bset.contains(&b))
                                    }
                                })
                                .collect();
                            let w = Arc::new(w);
                            cache.lock().unwrap().insert((n, n2), w.clone());
                            w
                        }
                    }
                };
                let r = &Dyadic::pow2(m as i64) + &Dyadic::pow2(f2.modulus.at(n2) as i64);
                let mut reach = BTreeSet::new();
                for &a in w.iter() {
                    reach.extend(x.ball(&x.point(a), &r, m));
                }
                keep = Some(match keep {
                    None => reach,
                    Some(k) => k.intersection(&reach).copied().collect(),
                });
                if keep.as_ref().is_some_and(|k| k.is_empty()) {
                    return Err(NameError::EmptyPreimage { level: m, depth });
                }
            }
        }
        Ok(keep.unwrap_or_default().into_iter().collect())
    });
    Ok(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::{finite_hausdorff, OracleSet};
    use crate::spaces::{real_point, unit_interval};

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn rp(s: &str) -> Point {
        vec![Coord::Real(d(s))]
    }

    #[test]
    fn local_graph_queries_match_full_cover() {
        use crate::expr::{parse, to_function, Window};
        use crate::spaces::cube;
        let e = parse("min(x0, abs(x1 - 1/2)) + x0 * x1").unwrap();
        let f = to_function(&e, 2, &Window::fit(&e.range(2))).unwrap();
        let local = graph_from_function(&f);
        let full = GraphName::new(local.name().clone(), local.modulus().cloned()).unwrap();
        for (a, b) in [("1/4", "1/2"), ("3/8", "7/8"), ("1", "0")] {
            let x = PointName::of_point(&cube(2), real_point(&[d(a), d(b)])).unwrap();
            for m in 2..5 {
                let p = x.point(m).unwrap();
                let r = Dyadic::pow2(m as i64 - 1);
                assert_eq!(local.values_near(&p, &r, m).unwrap(), full.values_near(&p, &r, m).unwrap());
            }
            assert_eq!(eval_from_graph(&local, &x, 2).unwrap(), eval_from_graph(&full, &x, 2).unwrap());
        }
    }

    fn unit() -> SetName {
        space_as_name(&unit_interval())
    }

    #[test]
    fn identity_graph_is_near_diagonal() {
        let g = graph_from_function(&identity(&unit()));
        let s = g.name().space().clone();
        for m in 0..8 {
            for p in g.name().points(m).unwrap() {
                let diff = (p[0].real().unwrap() - p[1].real().unwrap()).abs();
                assert!(diff <= Dyadic::pow2(m as i64), "level {m}: {p:?}");
            }
        }
        let _ = s;
    }

    #[test]
    fn constant_graph_and_eval() {
        let c = constant(&unit(), &unit_interval(), rp("3/4")).unwrap();
        let g = graph_from_function(&c);
        for m in 0..7 {
            for p in g.name().points(m).unwrap() {
                assert!((p[1].real().unwrap() - &d("3/4")).abs() <= Dyadic::pow2(m as i64));
            }
        }
        let y = unit_interval();
        for x in ["0", "1/3", "1"] {
            let x = if x == "1/3" { "85/256" } else { x };
            let xn = PointName::of_point(&y, rp(x)).unwrap();
            let v = eval_from_graph(&g, &xn, 6).unwrap();
            assert!(y.distance(&y.point(v), &rp("3/4")) < Dyadic::pow2(6));
        }
    }

    #[test]
    fn identity_eval() {
        let g = graph_from_function(&identity(&unit()));
        let y = unit_interval();
        let x = PointName::of_point(&y, rp("1/2")).unwrap();
        let v = eval_from_graph(&g, &x, 6).unwrap();
        assert!(y.distance(&y.point(v), &rp("1/2")) < Dyadic::pow2(6));
    }

    #[test]
    fn eval_outside_domain() {
        let left = OracleSet::hull(&unit_interval(), rp("0"), rp("1/4")).unwrap().name();
        let g = graph_from_function(&identity(&left));
        let x = PointName::of_point(&unit_interval(), rp("1")).unwrap();
        assert!(matches!(eval_from_graph(&g, &x, 4), Err(FunctionError::OutsideDomain { .. })));
    }

    #[test]
    fn modulus_examples() {
        let id = graph_from_function(&identity(&unit()));
        let m_id = modulus_from_graph(&id, 5, 12).unwrap();
        assert!(m_id <= 8);
        let c = graph_from_function(&constant(&unit(), &unit_interval(), rp("1/4")).unwrap());
        assert_eq!(modulus_from_graph(&c, 5, 12).unwrap(), 0);
    }

    #[test]
    fn restrict_identity_to_point() {
        let g = graph_from_function(&identity(&unit()));
        let half = OracleSet::finite(&unit_interval(), vec![rp("1/2")]).unwrap().name();
        let r = restrict(&g, &half).unwrap();
        let xy = r.name().space().clone();
        for m in 0..5 {
            for p in r.name().points(m).unwrap() {
                assert!(xy.distance(&p, &real_point(&[d("1/2"), d("1/2")])) <= Dyadic::pow2(m as i64));
            }
        }
        // restricting to the whole domain keeps the graph
        let full = restrict(&g, &unit()).unwrap();
        for m in 0..5 {
            let h = finite_hausdorff(&xy, &full.name().points(m).unwrap(), &g.name().points(m).unwrap());
            assert!(h <= Dyadic::pow2(m as i64 - 1));
        }
    }

    #[test]
    fn image_examples() {
        let y = unit_interval();
        let img = image(&identity(&unit()));
        let oracle = OracleSet::hull(&y, rp("0"), rp("1")).unwrap();
        for m in 0..8 {
            assert!(crate::names::check_cover(&img, &oracle, m, 3).unwrap().ok);
        }
        let c = image(&constant(&unit(), &y, rp("1/4")).unwrap());
        assert_eq!(c.query(5).unwrap().len(), 1);
    }

    #[test]
    fn identity_preimage() {
        let f = identity(&unit());
        let pre = preimage_regular(&f, &unit(), 4).unwrap();
        let oracle = OracleSet::hull(&unit_interval(), rp("0"), rp("1")).unwrap();
        for m in 0..6 {
            assert!(crate::names::check_cover(&pre, &oracle, m, 3).unwrap().ok);
        }
    }

    #[test]
    fn curry_projections() {
        let sq = crate::spaces::cube(2);
        let dom = space_as_name(&sq);
        let y = unit_interval();
        let half = PointName::of_point(&y, rp("1/2")).unwrap();
        let second = curry(&projection(&dom, true).unwrap(), &half).unwrap();
        let first = curry(&projection(&dom, false).unwrap(), &half).unwrap();
        for t in ["0", "1/4", "3/4", "1"] {
            let tn = PointName::of_point(&y, rp(t)).unwrap();
            for n in [3, 6, 9] {
                assert!(y.distance(&y.point(second.eval(&tn, n).unwrap()), &rp(t)) <= Dyadic::pow2(n as i64));
                assert!(y.distance(&y.point(first.eval(&tn, n).unwrap()), &rp("1/2")) <= Dyadic::pow2(n as i64));
            }
        }
    }

    #[test]
    fn compose_identity_and_constant() {
        let y = unit_interval();
        let id = identity(&unit());
        let idid = compose(&id, &id);
        let c = compose(&id, &constant(&unit(), &y, rp("1/4")).unwrap());
        for t in ["0", "3/8", "1"] {
            let tn = PointName::of_point(&y, rp(t)).unwrap();
            assert!(y.distance(&y.point(idid.eval(&tn, 8).unwrap()), &rp(t)) <= Dyadic::pow2(8));
            assert!(y.distance(&y.point(c.eval(&tn, 8).unwrap()), &rp("1/4")) <= Dyadic::pow2(8));
        }
    }
}
