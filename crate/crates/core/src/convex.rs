//! Convex bodies in the unit square and cube: exact hulls and volumes,
//! Euclidean surface area and Hausdorff distance enclosures, a bounded
//! sampler of polygons over dyadic grids, and the isoperimetric problem.
//!
//! Surface area and Hausdorff distance use the Euclidean metric, unlike the
//! max metric used elsewhere in the crate, because the isoperimetric
//! constant is Euclidean.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::{pi_enclosure, sqrt_enclosure, Dyadic, DyadicInterval};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConvexError {
    #[error("point list must be non-empty")]
    Empty,
    #[error("only dimensions 2 and 3 are supported, got {0}")]
    Dimension(usize),
    #[error("point {0} lies outside the unit cube")]
    OutsideCube(String),
    #[error("body is lower-dimensional")]
    Degenerate,
    #[error("bodies have different dimensions")]
    Mismatch,
    #[error("sampler would enumerate {count} subsets, above the cap {cap}")]
    Cap { count: u128, cap: u128 },
}

/// The convex hull of finitely many dyadic points in `[0,1]^dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexBody {
    dim: usize,
    /// Hull vertices; counterclockwise in dimension 2.
    vertices: Vec<Vec<Dyadic>>,
    /// Boundary triangles with outward orientation (full 3D bodies), or a
    /// fan over the polygon (planar 3D bodies); empty otherwise.
    triangles: Vec<[usize; 3]>,
    /// Affine dimension of the hull.
    rank: usize,
}

/// On-disk body format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyFile {
    pub dim: usize,
    pub vertices: Vec<Vec<Dyadic>>,
}

type Vec3 = [Dyadic; 3];

fn sub3(a: &[Dyadic], b: &[Dyadic]) -> Vec3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [&u[1] * &v[2] - &u[2] * &v[1], &u[2] * &v[0] - &u[0] * &v[2], &u[0] * &v[1] - &u[1] * &v[0]]
}

fn dot3(u: &Vec3, v: &Vec3) -> Dyadic {
    &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2]
}

fn is_zero3(u: &Vec3) -> bool {
    u.iter().all(Dyadic::is_zero)
}

/// Twice the signed area of `(a, b, c)`; positive for a left turn.
fn orient2(a: &[Dyadic], b: &[Dyadic], c: &[Dyadic]) -> Dyadic {
    (&b[0] - &a[0]) * (&c[1] - &a[1]) - (&b[1] - &a[1]) * (&c[0] - &a[0])
}

/// Andrew's monotone chain on exact coordinates; drops collinear points.
/// Returns indices in counterclockwise order.
fn hull2_indices(pts: &[Vec<Dyadic>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| pts[i].cmp(&pts[j]));
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() <= 2 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && !orient2(&pts[lower[lower.len() - 2]], &pts[lower[lower.len() - 1]], &pts[i]).is_positive()
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && !orient2(&pts[upper[upper.len() - 2]], &pts[upper[upper.len() - 1]], &pts[i]).is_positive()
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && pts[lower[0]] == pts[lower[1]] {
        lower.pop();
    }
    lower
}

fn project(p: &[Dyadic], drop: usize) -> Vec<Dyadic> {
    match drop {
        0 => vec![p[1].clone(), p[2].clone()],
        1 => vec![p[2].clone(), p[0].clone()],
        _ => vec![p[0].clone(), p[1].clone()],
    }
}

fn dominant_axis(n: &Vec3) -> usize {
    (0..3).max_by(|&i, &j| n[i].abs().cmp(&n[j].abs()).then(j.cmp(&i))).unwrap()
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Dyadic>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Affine dimension of the body.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.dim
    }

    pub fn to_file(&self) -> BodyFile {
        BodyFile { dim: self.dim, vertices: self.vertices.clone() }
    }

    pub fn from_file(f: &BodyFile) -> Result<ConvexBody, ConvexError> {
        let b = hull(&f.vertices)?;
        if b.dim != f.dim {
            return Err(ConvexError::Dimension(f.dim));
        }
        Ok(b)
    }

    /// Whether `p` lies in the body.
    pub fn contains(&self, p: &[Dyadic]) -> bool {
        squared_distance(self, p).is_zero()
    }
}

/// Convex hull with a minimal vertex list.
pub fn hull(points: &[Vec<Dyadic>]) -> Result<ConvexBody, ConvexError> {
    let first = points.first().ok_or(ConvexError::Empty)?;
    let dim = first.len();
    if !(2..=3).contains(&dim) || points.iter().any(|p| p.len() != dim) {
        return Err(ConvexError::Dimension(dim));
    }
    let (zero, one) = (Dyadic::zero(), Dyadic::one());
    if let Some(p) = points.iter().find(|p| p.iter().any(|x| x < &zero || x > &one)) {
        let s: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        return Err(ConvexError::OutsideCube(format!("({})", s.join(", "))));
    }
    let mut pts: Vec<Vec<Dyadic>> = points.to_vec();
    pts.sort();
    pts.dedup();
    if dim == 2 {
        let idx = hull2_indices(&pts);
        let rank = match idx.len() {
            1 => 0,
            2 => 1,
            _ => 2,
        };
        return Ok(ConvexBody {
            dim,
            vertices: idx.into_iter().map(|i| pts[i].clone()).collect(),
            triangles: vec![],
            rank,
        });
    }
    Ok(hull3(pts))
}

fn hull3(pts: Vec<Vec<Dyadic>>) -> ConvexBody {
    let p0 = &pts[0];
    let Some(i1) = (1..pts.len()).find(|&i| pts[i] != *p0) else {
        return ConvexBody { dim: 3, vertices: vec![p0.clone()], triangles: vec![], rank: 0 };
    };
    let u = sub3(&pts[i1], p0);
    let normal = (0..pts.len()).map(|i| cross(&u, &sub3(&pts[i], p0))).find(|n| !is_zero3(n));
    let Some(normal) = normal else {
        // collinear: the extremes along the line
        let key = |p: &Vec<Dyadic>| dot3(&sub3(p, p0), &u);
        let lo = pts.iter().min_by_key(|p| key(p)).unwrap().clone();
        let hi = pts.iter().max_by_key(|p| key(p)).unwrap().clone();
        return ConvexBody { dim: 3, vertices: vec![lo, hi], triangles: vec![], rank: 1 };
    };
    let off_plane = pts.iter().any(|p| !dot3(&sub3(p, p0), &normal).is_zero());
    if !off_plane {
        let (vertices, triangles) = planar_polygon(&pts, &normal);
        return ConvexBody { dim: 3, vertices, triangles, rank: 2 };
    }
    // full-dimensional: every supporting plane through three points
    let n = pts.len();
    let mut faces: Vec<(Vec<usize>, Vec3)> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let nrm = cross(&sub3(&pts[j], &pts[i]), &sub3(&pts[k], &pts[i]));
                if is_zero3(&nrm) {
                    continue;
                }
                let side: Vec<Dyadic> = pts.iter().map(|p| dot3(&sub3(p, &pts[i]), &nrm)).collect();
                let outward = if side.iter().all(|s| !s.is_positive()) {
                    nrm
                } else if side.iter().all(|s| !s.is_negative()) {
                    [-nrm[0].clone(), -nrm[1].clone(), -nrm[2].clone()]
                } else {
                    continue;
                };
                let on: Vec<usize> = (0..n).filter(|&l| side[l].is_zero()).collect();
                if seen.insert(on.clone()) {
                    faces.push((on, outward));
                }
            }
        }
    }
    let mut vertex_set: Vec<Vec<Dyadic>> = Vec::new();
    let mut tri_pts: Vec<[Vec<Dyadic>; 3]> = Vec::new();
    for (on, outward) in faces {
        let face_pts: Vec<Vec<Dyadic>> = on.iter().map(|&l| pts[l].clone()).collect();
        let (poly, tris) = planar_polygon(&face_pts, &outward);
        for t in tris {
            tri_pts.push([poly[t[0]].clone(), poly[t[1]].clone(), poly[t[2]].clone()]);
        }
        vertex_set.extend(poly);
    }
    vertex_set.sort();
    vertex_set.dedup();
    let pos = |p: &Vec<Dyadic>| vertex_set.binary_search(p).unwrap();
    let triangles = tri_pts.iter().map(|[a, b, c]| [pos(a), pos(b), pos(c)]).collect();
    ConvexBody { dim: 3, vertices: vertex_set, triangles, rank: 3 }
}

/// Hull of coplanar points as an ordered polygon, with a fan triangulation
/// whose normals point along `normal`.
fn planar_polygon(pts: &[Vec<Dyadic>], normal: &Vec3) -> (Vec<Vec<Dyadic>>, Vec<[usize; 3]>) {
    let axis = dominant_axis(normal);
    let proj: Vec<Vec<Dyadic>> = pts.iter().map(|p| project(p, axis)).collect();
    let idx = hull2_indices(&proj);
    let mut poly: Vec<Vec<Dyadic>> = idx.into_iter().map(|i| pts[i].clone()).collect();
    if poly.len() >= 3 {
        let n0 = cross(&sub3(&poly[1], &poly[0]), &sub3(&poly[2], &poly[0]));
        if dot3(&n0, normal).is_negative() {
            poly.reverse();
        }
    }
    let tris = (1..poly.len().saturating_sub(1)).map(|i| [0, i, i + 1]).collect();
    (poly, tris)
}

/// Exact volume (area in dimension 2).
pub fn volume(b: &ConvexBody) -> BigRational {
    if !b.is_full() {
        return BigRational::zero();
    }
    if b.dim == 2 {
        return area2(&b.vertices).to_rational();
    }
    let o = &b.vertices[0];
    let six: Dyadic = b
        .triangles
        .iter()
        .map(|t| {
            let (a, c, d) = (&b.vertices[t[0]], &b.vertices[t[1]], &b.vertices[t[2]]);
            dot3(&sub3(a, o), &cross(&sub3(c, o), &sub3(d, o)))
        })
        .sum();
    six.to_rational() / BigRational::from_integer(BigInt::from(6))
}

/// Shoelace area of a counterclockwise polygon; always dyadic.
fn area2(v: &[Vec<Dyadic>]) -> Dyadic {
    let n = v.len();
    let twice: Dyadic = (0..n).map(|i| &v[i][0] * &v[(i + 1) % n][1] - &v[(i + 1) % n][0] * &v[i][1]).sum();
    twice.halve()
}

/// Exact area of a planar body as a dyadic.
pub fn area(b: &ConvexBody) -> Option<Dyadic> {
    (b.dim == 2).then(|| if b.is_full() { area2(&b.vertices) } else { Dyadic::zero() })
}

fn bits_for(count: usize) -> u32 {
    usize::BITS - count.max(1).leading_zeros()
}

/// Enclosure of the Euclidean perimeter (dimension 2) or boundary area
/// (dimension 3) of width at most `2^-k`.
pub fn surface(b: &ConvexBody, k: u32) -> Result<DyadicInterval, ConvexError> {
    if !b.is_full() {
        return Err(ConvexError::Degenerate);
    }
    let terms: Vec<(Dyadic, bool)> = if b.dim == 2 {
        let n = b.vertices.len();
        (0..n)
            .map(|i| {
                let (p, q) = (&b.vertices[i], &b.vertices[(i + 1) % n]);
                let (dx, dy) = (&q[0] - &p[0], &q[1] - &p[1]);
                (&dx * &dx + &dy * &dy, false)
            })
            .collect()
    } else {
        b.triangles
            .iter()
            .map(|t| {
                let nrm =
                    cross(&sub3(&b.vertices[t[1]], &b.vertices[t[0]]), &sub3(&b.vertices[t[2]], &b.vertices[t[0]]));
                (dot3(&nrm, &nrm), true)
            })
            .collect()
    };
    let prec = k + bits_for(terms.len());
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::zero();
    for (sq, half) in terms {
        let r = sqrt_enclosure(&DyadicInterval::point(sq), prec).expect("non-negative");
        let (l, h) = if half { (r.lo().halve(), r.hi().halve()) } else { (r.lo().clone(), r.hi().clone()) };
        lo = lo + l;
        hi = hi + h;
    }
    Ok(DyadicInterval::new(lo, hi).expect("ordered"))
}

fn rat(d: &Dyadic) -> BigRational {
    d.to_rational()
}

fn rvec(p: &[Dyadic]) -> Vec<BigRational> {
    p.iter().map(rat).collect()
}

fn rsub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn rdot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rcross(u: &[BigRational], v: &[BigRational]) -> Vec<BigRational> {
    vec![&u[1] * &v[2] - &u[2] * &v[1], &u[2] * &v[0] - &u[0] * &v[2], &u[0] * &v[1] - &u[1] * &v[0]]
}

fn seg_sq(p: &[BigRational], a: &[BigRational], b: &[BigRational]) -> BigRational {
    let ab = rsub(b, a);
    let ap = rsub(p, a);
    let len = rdot(&ab, &ab);
    if len.is_zero() {
        return rdot(&ap, &ap);
    }
    let t = rdot(&ap, &ab) / &len;
    let t = if t.is_negative() {
        BigRational::zero()
    } else if t > BigRational::one() {
        BigRational::one()
    } else {
        t
    };
    let diff: Vec<BigRational> = ap.iter().zip(&ab).map(|(x, y)| x - &t * y).collect();
    rdot(&diff, &diff)
}

fn tri_sq(p: &[BigRational], a: &[BigRational], b: &[BigRational], c: &[BigRational]) -> BigRational {
    let n = rcross(&rsub(b, a), &rsub(c, a));
    let nn = rdot(&n, &n);
    if nn.is_zero() {
        return seg_sq(p, a, b).min(seg_sq(p, b, c)).min(seg_sq(p, a, c));
    }
    let inside =
        [(a, b), (b, c), (c, a)].iter().all(|(u, v)| !rdot(&rcross(&rsub(v, u), &rsub(p, u)), &n).is_negative());
    if inside {
        let h = rdot(&rsub(p, a), &n);
        return &h * &h / nn;
    }
    seg_sq(p, a, b).min(seg_sq(p, b, c)).min(seg_sq(p, c, a))
}

/// Exact squared Euclidean distance from `p` to the body.
pub fn squared_distance(b: &ConvexBody, p: &[Dyadic]) -> BigRational {
    let q = rvec(p);
    let vs: Vec<Vec<BigRational>> = b.vertices.iter().map(|v| rvec(v)).collect();
    match (b.dim, b.rank) {
        (_, 0) => {
            let d = rsub(&q, &vs[0]);
            rdot(&d, &d)
        }
        (_, 1) => seg_sq(&q, &vs[0], &vs[1]),
        (2, _) => {
            let n = vs.len();
            let inside = (0..n).all(|i| !orient2(&b.vertices[i], &b.vertices[(i + 1) % n], p).is_negative());
            if inside {
                return BigRational::zero();
            }
            (0..n).map(|i| seg_sq(&q, &vs[i], &vs[(i + 1) % n])).min().unwrap()
        }
        (_, 2) => b.triangles.iter().map(|t| tri_sq(&q, &vs[t[0]], &vs[t[1]], &vs[t[2]])).min().unwrap(),
        _ => {
            let inside = b.triangles.iter().all(|t| {
                let n = rcross(&rsub(&vs[t[1]], &vs[t[0]]), &rsub(&vs[t[2]], &vs[t[0]]));
                !rdot(&rsub(&q, &vs[t[0]]), &n).is_positive()
            });
            if inside {
                return BigRational::zero();
            }
            b.triangles.iter().map(|t| tri_sq(&q, &vs[t[0]], &vs[t[1]], &vs[t[2]])).min().unwrap()
        }
    }
}

/// Dyadic enclosure of `sqrt(r)` with width at most `2^-k`.
pub fn sqrt_rational(r: &BigRational, k: u32) -> DyadicInterval {
    let scale = BigInt::one() << (2 * k as usize);
    let scaled = r * BigRational::from_integer(scale);
    let fl = scaled.floor().to_integer();
    let s = fl.sqrt();
    let exact = BigRational::from_integer(&s * &s) == scaled;
    let hi = if exact { s.clone() } else { &s + 1 };
    DyadicInterval::new(Dyadic::new(s, k as i64), Dyadic::new(hi, k as i64)).expect("ordered")
}

/// Enclosure of the Euclidean Hausdorff distance between two bodies, of
/// width at most `2^-k`. For convex polytopes the largest distance from one
/// body to the other is attained at a vertex.
pub fn hausdorff_convex(v: &ConvexBody, w: &ConvexBody, k: u32) -> Result<DyadicInterval, ConvexError> {
    if v.dim != w.dim {
        return Err(ConvexError::Mismatch);
    }
    let one_way = |a: &ConvexBody, b: &ConvexBody| a.vertices.iter().map(|p| squared_distance(b, p)).max().unwrap();
    let sq = one_way(v, w).max(one_way(w, v));
    Ok(sqrt_rational(&sq, k))
}

/// Default cap on the number of subsets enumerated by [`kc_sample`].
pub const KC_SAMPLE_CAP: u128 = 2_000_000;

fn binom(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Hulls of at most `max_vertices` points of the level-`m` grid of the unit
/// square, deduplicated by vertex list.
pub fn kc_sample(m: u32, max_vertices: usize) -> Result<Vec<ConvexBody>, ConvexError> {
    let side = (1u64 << m) + 1;
    let grid: Vec<Vec<Dyadic>> = (0..side)
        .flat_map(|i| {
            (0..side).map(move |j| vec![Dyadic::ratio(i as i64, m as i64), Dyadic::ratio(j as i64, m as i64)])
        })
        .collect();
    let n = grid.len() as u128;
    let count: u128 = (1..=max_vertices as u128).map(|k| binom(n, k.min(n))).fold(0, u128::saturating_add);
    if count > KC_SAMPLE_CAP {
        return Err(ConvexError::Cap { count, cap: KC_SAMPLE_CAP });
    }
    let mut seen: HashSet<Vec<Vec<Dyadic>>> = HashSet::new();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..grid.len()).map(|i| vec![i]).collect();
    stack.reverse();
    while let Some(sel) = stack.pop() {
        let pts: Vec<Vec<Dyadic>> = sel.iter().map(|&i| grid[i].clone()).collect();
        let body = hull(&pts)?;
        if seen.insert(body.vertices.clone()) {
            out.push(body);
        }
        if sel.len() < max_vertices {
            let last = *sel.last().unwrap();
            for next in ((last + 1)..grid.len()).rev() {
                let mut s = sel.clone();
                s.push(next);
                stack.push(s);
            }
        }
    }
    Ok(out)
}

/// Search family for the isoperimetric problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoSchedule {
    /// Regular polygons with `3..=max_gon` vertices are tried.
    pub max_gon: usize,
    /// Bisect the scale of the best polygon towards perimeter exactly 1.
    pub refine: bool,
}

impl Default for IsoSchedule {
    fn default() -> Self {
        IsoSchedule { max_gon: 64, refine: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoResult {
    /// Contains the largest area of a convex body with perimeter at most 1.
    pub interval: DyadicInterval,
    /// The feasible body realizing the lower bound.
    pub body: ConvexBody,
    pub gon: usize,
    pub perimeter: DyadicInterval,
}

/// Grid on which polygon vertices are placed.
const VERTEX_BITS: i64 = 48;

/// A near-regular `k`-gon centred in the square whose circumradius is
/// `scale` times that of the regular `k`-gon with perimeter 1.
fn regular_gon(k: usize, scale: f64) -> Option<ConvexBody> {
    let kf = k as f64;
    let r = scale / (2.0 * kf * (std::f64::consts::PI / kf).sin());
    let pts: Vec<Vec<Dyadic>> = (0..k)
        .map(|j| {
            let a = 2.0 * std::f64::consts::PI * j as f64 / kf;
            let c = |x: f64| Dyadic::from_f64(0.5 + x).map(|d| d.round_to(VERTEX_BITS));
            Some(vec![c(r * a.cos())?, c(r * a.sin())?])
        })
        .collect::<Option<_>>()?;
    hull(&pts).ok()
}

fn feasible(b: &ConvexBody, k: u32) -> Option<DyadicInterval> {
    let p = surface(b, k).ok()?;
    (p.hi() <= &Dyadic::one()).then_some(p)
}

/// Certified enclosure of the largest area of a planar convex body with
/// perimeter at most 1. The lower end is the exact area of a feasible
/// polygon; the upper end is the isoperimetric bound `1 / (4 pi)` rounded
/// up with a lower enclosure of pi.
pub fn isoperimetric(n: u32, schedule: &IsoSchedule) -> IsoResult {
    let k = n.max(1) + 40;
    let candidates: Vec<(Dyadic, ConvexBody, usize, DyadicInterval)> = (3..=schedule.max_gon.max(3))
        .into_par_iter()
        .filter_map(|gon| {
            [40, 30, 20, 10, 1].into_iter().find_map(|shrink| {
                let body = regular_gon(gon, 1.0 - (shrink as f64).exp2().recip())?;
                let per = feasible(&body, k)?;
                Some((area(&body).unwrap(), body, gon, per))
            })
        })
        .collect();
    // largest area wins; ties go to the fewest vertices
    let best = candidates.into_iter().reduce(|a, b| if b.0 > a.0 { b } else { a });
    let (mut lo, mut body, gon, mut per) = best.expect("the triangle family is feasible");
    if schedule.refine {
        let (mut a, mut b) = (1.0 - 2f64.powi(-10), 1.0 + 2f64.powi(-10));
        for _ in 0..40 {
            let mid = 0.5 * (a + b);
            match regular_gon(gon, mid).and_then(|g| feasible(&g, k).map(|p| (g, p))) {
                Some((g, p)) => {
                    let ar = area(&g).unwrap();
                    if ar > lo {
                        lo = ar;
                        body = g;
                        per = p;
                    }
                    a = mid;
                }
                None => b = mid,
            }
        }
    }
    let pi = pi_enclosure();
    let four_pi = pi.lo().mul_pow2(2);
    let hi = Dyadic::one().div_round(&four_pi, k as i64, true).expect("pi is positive");
    IsoResult {
        interval: DyadicInterval::new(lo, hi).expect("feasible area below the bound"),
        body,
        gon,
        perimeter: per,
    }
}
