//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::collections::VecDeque;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use cms_core::convex::{hausdorff_convex, hull, surface, volume, ConvexBody};
use cms_core::expr::{random_expr, to_function, Window};
use cms_core::frechet::{
    discrete_frechet, frechet_loops, frechet_paths, frechet_paths_at, Curve, Orientation, Topology,
};
use cms_core::functions::{eval_from_graph, graph_from_function};
use cms_core::names::{
    check_cover, check_point_consistency, check_standard, finite_hausdorff, point_to_singleton, select_point,
    singleton_to_point, standardize, union, OracleSet, SetFixture,
};
use cms_core::optimize::{maximize, OptProblem, OptStatus};
use cms_core::spaces::{covering_check, cube, pair, real_point, rounding_check, unit_interval, unpair, SpaceId};
use cms_core::{Dyadic, PointName};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}

fn pi_bounds() -> (Dyadic, Dyadic) {
    // the nearest double below pi and its successor
    let lo = std::f64::consts::PI;
    let hi = f64::from_bits(lo.to_bits() + 1);
    (Dyadic::from_f64(lo).unwrap(), Dyadic::from_f64(hi).unwrap())
}

fn isoperimetric() -> Verdict {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_cms"))
        .args(["isoperimetric", "--max-gon", "64", "--precision", "10", "--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.success(), || format!("exit status {}", out.status))?;
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let lo = d(v["interval"]["lo"].as_str().ok_or("missing lower bound")?);
    let hi = d(v["interval"]["hi"].as_str().ok_or("missing upper bound")?);
    let (pi_lo, pi_hi) = pi_bounds();
    let four = Dyadic::from_int(4);
    ensure(&four * &(&lo * &pi_hi) < Dyadic::one(), || format!("lower bound {lo} is not below 1/(4 pi)"))?;
    ensure(&four * &(&hi * &pi_lo) >= Dyadic::one(), || format!("upper bound {hi} is below 1/(4 pi)"))?;
    let gon64 = 1.0 / (256.0 * (std::f64::consts::PI / 64.0).tan());
    ensure(lo.to_f64() >= 0.0794, || format!("lower bound {} < 0.0794", lo.to_f64()))?;
    ensure(lo.to_f64() <= gon64 + 1e-12, || format!("lower bound beats the regular 64-gon {gon64}"))?;
    ensure(hi.to_f64() <= 0.0796, || format!("upper bound {} > 0.0796", hi.to_f64()))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("[{:.7}, {:.7}] in {:.2?}", lo.to_f64(), hi.to_f64(), elapsed))
}

/// Samples of `(x, s(x) + offset)` for a random 1-Lipschitz staircase `s`.
fn staircase(level: u32, seed: u64, offset: i64) -> Curve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1i64 << level;
    let mut s = n / 2;
    let mut pts = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        if i > 0 {
            s = (s + rng.gen_range(-1..=1)).clamp(0, n);
        }
        pts.push(vec![Dyadic::ratio(i, level as i64), Dyadic::ratio(s, level as i64) + Dyadic::from_int(offset)]);
    }
    Curve::from_samples(Topology::Path, Dyadic::one(), pts).unwrap()
}

fn frechet_offset() -> Verdict {
    let mut slowest = Duration::ZERO;
    for seed in [1, 2, 3] {
        let (a, b) = (staircase(12, seed, 0), staircase(12, seed, 1));
        let r = frechet_paths(&a, &b, Orientation::Oriented, 10).map_err(|e| e.to_string())?;
        ensure(r.enclosure.contains(&Dyadic::one()), || format!("seed {seed}: {} misses 1", r.enclosure))?;
        ensure(r.enclosure.width() <= Dyadic::pow2(10), || format!("seed {seed}: width {}", r.enclosure.width()))?;
        let start = Instant::now();
        let full = frechet_paths_at(&a, &b, Orientation::Oriented, 12).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        ensure(full.enclosure.contains(&Dyadic::one()), || format!("seed {seed}: level 12 gives {}", full.enclosure))?;
    }
    ensure(slowest < Duration::from_secs(10), || format!("level 12 took {slowest:?}"))?;
    Ok(format!("3 staircases, level 12 in at most {slowest:.2?}"))
}

fn max_dist(p: &[Dyadic], q: &[Dyadic]) -> Dyadic {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).max().unwrap()
}

/// Enumerates monotone couplings depth first, abandoning a partial
/// coupling only once it is already no better than the best complete one.
fn brute_force(p: &[Vec<Dyadic>], q: &[Vec<Dyadic>]) -> Dyadic {
    fn go(p: &[Vec<Dyadic>], q: &[Vec<Dyadic>], i: usize, j: usize, cur: Dyadic, best: &mut Option<Dyadic>) {
        let cur = cur.max_with(&max_dist(&p[i], &q[j]));
        if best.as_ref().is_some_and(|b| &cur >= b) {
            return;
        }
        if i + 1 == p.len() && j + 1 == q.len() {
            *best = Some(cur);
            return;
        }
        if i + 1 < p.len() && j + 1 < q.len() {
            go(p, q, i + 1, j + 1, cur.clone(), best);
        }
        if i + 1 < p.len() {
            go(p, q, i + 1, j, cur.clone(), best);
        }
        if j + 1 < q.len() {
            go(p, q, i, j + 1, cur, best);
        }
    }
    let mut best = None;
    go(p, q, 0, 0, Dyadic::zero(), &mut best);
    best.unwrap()
}

/// Smallest pairwise distance `t` whose free cells connect the corners.
fn threshold_search(p: &[Vec<Dyadic>], q: &[Vec<Dyadic>]) -> Dyadic {
    let mut cands: Vec<Dyadic> = p.iter().flat_map(|a| q.iter().map(move |b| max_dist(a, b))).collect();
    cands.sort();
    cands.dedup();
    let reachable = |t: &Dyadic| {
        let free = |i: usize, j: usize| &max_dist(&p[i], &q[j]) <= t;
        if !free(0, 0) {
            return false;
        }
        let mut seen = vec![vec![false; q.len()]; p.len()];
        let mut queue = VecDeque::from([(0, 0)]);
        seen[0][0] = true;
        while let Some((i, j)) = queue.pop_front() {
            for (a, b) in [(i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                if a < p.len() && b < q.len() && !seen[a][b] && free(a, b) {
                    seen[a][b] = true;
                    queue.push_back((a, b));
                }
            }
        }
        seen[p.len() - 1][q.len() - 1]
    };
    cands.into_iter().find(|t| reachable(t)).unwrap()
}

fn discrete_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let poly = |rng: &mut ChaCha8Rng, len: usize| -> Vec<Vec<Dyadic>> {
        (0..len).map(|_| (0..2).map(|_| Dyadic::ratio(rng.gen_range(0..256), 8)).collect()).collect()
    };
    let mut mismatches = 0;
    for _ in 0..100 {
        let (la, lb) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let (p, q) = (poly(&mut rng, la), poly(&mut rng, lb));
        let dp = discrete_frechet(&p, &q).map_err(|e| e.to_string())?;
        let realized = dp.pairs.iter().map(|&(i, j)| max_dist(&p[i], &q[j])).max().unwrap();
        if dp.value != brute_force(&p, &q) || dp.value != threshold_search(&p, &q) || realized != dp.value {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    Ok("100 pairs, 0 mismatches".into())
}

fn random_body(rng: &mut ChaCha8Rng, dim: usize) -> ConvexBody {
    let k = rng.gen_range(dim + 1..=8);
    let pts: Vec<Vec<Dyadic>> =
        (0..k).map(|_| (0..dim).map(|_| Dyadic::ratio(rng.gen_range(0..=64), 6)).collect()).collect();
    hull(&pts).unwrap()
}

fn volume_lipschitz() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let slack = Dyadic::pow2(16);
    let mut violations = 0;
    for (dim, pairs) in [(2usize, 200), (3, 100)] {
        for _ in 0..pairs {
            let (v, w) = (random_body(&mut rng, dim), random_body(&mut rng, dim));
            let h = hausdorff_convex(&v, &w, 24).unwrap();
            let bound = (Dyadic::from_int(2 * dim as i64) * h.hi().clone() + slack.clone()).to_rational();
            let diff = volume(&v) - volume(&w);
            if diff > bound || -diff > bound {
                violations += 1;
            }
            if dim == 2 && v.is_full() && w.is_full() {
                let (sv, sw) = (surface(&v, 24).unwrap(), surface(&w, 24).unwrap());
                let gap = (sv.hi() - sw.lo()).max_with(&(sw.hi() - sv.lo()));
                if gap > Dyadic::from_int(8) * h.hi().clone() + slack.clone() {
                    violations += 1;
                }
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("300 volume pairs and the planar surface pairs, 0 violations".into())
}

fn space_contracts() -> Verdict {
    for id in ["interval", "circle", "cantor", "cube:2", "cube:3"] {
        let s = id.parse::<SpaceId>().unwrap().build().unwrap();
        for m in 0..=10 {
            let c = covering_check(&s, m, m + 2);
            ensure(c.ok, || format!("{id}: covering at level {m}, worst {}", c.worst))?;
        }
        for m in 0..=8 {
            for j in 1..=2 {
                let r = rounding_check(&s, m, j);
                ensure(r.ok, || format!("{id}: rounding from level {} to {m}, worst {}", m + j, r.worst))?;
            }
        }
    }
    let products = ["cube:2", "cube:3", "product(interval,circle)", "product(cantor,interval)"];
    for id in products {
        let s = id.parse::<SpaceId>().unwrap().build().unwrap();
        let (x, y) = s.factors().unwrap();
        for m in 0..=6 {
            let n = s.level_count(m);
            ensure(n == x.level_count(m) * y.level_count(m), || format!("{id}: level {m} has {n} indices"))?;
            for w in 0..n {
                let (u, v) = unpair(&s, w).unwrap();
                ensure(u < x.level_count(m) && v < y.level_count(m) && pair(&s, u, v) == Some(w), || {
                    format!("{id}: index {w} at level {m} does not round-trip")
                })?;
            }
        }
    }
    Ok(format!(
        "covering to level 10 and rounding to level 8 on 5 spaces; pairing bijective on {} products",
        products.len()
    ))
}

fn graph_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y = unit_interval();
    let n = 8;
    let mut violations = 0;
    for _ in 0..50 {
        let e = random_expr(&mut rng, 1, 3);
        let window = Window::fit(&e.range(1));
        let f = to_function(&e, 1, &window).map_err(|e| e.to_string())?;
        let g = graph_from_function(&f);
        for _ in 0..64 {
            let x =
                PointName::of_point(&cube(1), real_point(&[Dyadic::ratio(rng.gen_range(0..=1 << 12), 12)])).unwrap();
            let direct = y.point(f.eval(&x, n).map_err(|e| e.to_string())?);
            let via = y.point(eval_from_graph(&g, &x, n).map_err(|e| e.to_string())?);
            if y.distance(&direct, &via) > Dyadic::pow2(7) {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("50 functions x 64 points, 0 violations".into())
}

fn optimizer() -> Verdict {
    let fixtures = [
        (1, "x0", "x0 - 1/2", "1/2"),
        (1, "1 - abs(x0 - 1/4)", "x0 - 1", "1"),
        (2, "(x0 + x1) * 1/2", "max(x0, x1) - 1/2", "1/2"),
    ];
    for (dim, obj, con, opt) in fixtures {
        let p = OptProblem::parse(dim, obj, con).map_err(|e| e.to_string())?;
        let opt = d(opt);
        let r = maximize(&p, 10, 1_000_000).map_err(|e| e.to_string())?;
        ensure(r.status == OptStatus::Converged, || format!("{obj}: status {}", r.status))?;
        let iv = r.interval().unwrap();
        ensure(iv.contains(&opt) && iv.width() <= Dyadic::pow2(10), || format!("{obj}: {iv}"))?;
        for budget in [0, 1, 3, 10, 30] {
            let r = maximize(&p, 10, budget).map_err(|e| e.to_string())?;
            let sound = r.hi >= opt && r.lo.as_ref().is_none_or(|l| l <= &opt);
            ensure(sound, || format!("{obj}: budget {budget} gives [{:?}, {}]", r.lo, r.hi))?;
        }
    }
    Ok("3 fixtures converged; truncated runs sound".into())
}

fn loop_shift() -> Verdict {
    // an octagon traversed at constant speed, sampled 32 times
    let k = 5;
    let n = 1usize << k;
    let corners = [
        ("1/4", "0"),
        ("3/4", "0"),
        ("1", "1/4"),
        ("1", "3/4"),
        ("3/4", "1"),
        ("1/4", "1"),
        ("0", "3/4"),
        ("0", "1/4"),
    ];
    let corners: Vec<[Dyadic; 2]> = corners.iter().map(|(x, y)| [d(x), d(y)]).collect();
    let at = |i: usize| -> Vec<Dyadic> {
        let (seg, step) = ((i % n) / 4, (i % n) % 4);
        let (a, b) = (&corners[seg], &corners[(seg + 1) % 8]);
        let t = Dyadic::ratio(step as i64, 2);
        (0..2).map(|c| &a[c] + &(&(&b[c] - &a[c]) * &t)).collect()
    };
    let lip = Dyadic::from_int(4);
    let a = Curve::from_samples(Topology::Loop, lip.clone(), (0..=n).map(at).collect()).map_err(|e| e.to_string())?;
    let b = Curve::from_samples(Topology::Loop, lip, (0..=n).map(|i| at(i + n / 4)).collect())
        .map_err(|e| e.to_string())?;
    let r = frechet_loops(&a, &b, Orientation::Oriented, 8).map_err(|e| e.to_string())?;
    ensure(r.enclosure.contains(&Dyadic::zero()), || format!("{} misses 0", r.enclosure))?;
    ensure(r.enclosure.hi() <= &Dyadic::pow2(8), || format!("upper bound {}", r.enclosure.hi()))?;
    Ok(format!("enclosure {}", r.enclosure))
}

fn name_layer() -> Verdict {
    let text = include_str!("../../../fixtures/sets.json");
    let fixtures: Vec<SetFixture> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut checks = 0;
    let fail = |i: usize, what: &str, m: u32, detail: &str| format!("fixture {i}: {what} at level {m}: {detail}");
    for (i, f) in fixtures.iter().enumerate() {
        let oracle = OracleSet::from_fixture(f).map_err(|e| e.to_string())?;
        let space = oracle.space().clone();
        // standardizing reads level m + 3, which is large for two coordinates
        let top = if space.arity() > 1 { 5 } else { 8 };
        let name = oracle.name();
        let std = standardize(&name);
        let first = PointName::of_point(&space, oracle.defining_points()[0].clone()).unwrap();
        let joined = union(&name, &point_to_singleton(&first)).unwrap();
        for m in 0..=top {
            for (what, nm) in [("cover", &name), ("standardized cover", &std), ("union with a member", &joined)] {
                let c = check_cover(nm, &oracle, m, 3).unwrap();
                ensure(c.ok, || fail(i, what, m, &c.detail))?;
                checks += 1;
            }
            for (what, nm) in [("standard window", &name), ("standardized window", &std)] {
                let c = check_standard(nm, &oracle, m).unwrap();
                ensure(c.ok, || fail(i, what, m, &c.detail))?;
                checks += 1;
            }
            let here = name.points(m).unwrap();
            for k in 0..m {
                let gap = finite_hausdorff(&space, &here, &name.points(k).unwrap());
                ensure(gap <= Dyadic::pow2(m as i64) + Dyadic::pow2(k as i64), || {
                    fail(i, "consistency", m, &gap.to_string())
                })?;
                checks += 1;
            }
        }
        let x = select_point(&name);
        let c = check_point_consistency(&x, top).unwrap();
        ensure(c.ok, || fail(i, "selected point", top, &c.detail))?;
        let gap = oracle.distance_to(&x.point(top).unwrap());
        ensure(gap <= Dyadic::pow2(top as i64 - 1), || fail(i, "selected point distance", top, &gap.to_string()))?;
        let back = singleton_to_point(&point_to_singleton(&first));
        for m in 0..=top {
            let gap = space.distance(&back.point(m).unwrap(), &first.point(m).unwrap());
            ensure(gap <= Dyadic::pow2(m as i64 - 1), || fail(i, "singleton round trip", m, &gap.to_string()))?;
        }
        checks += 2 + top as usize;
    }
    Ok(format!("{} fixtures, {checks} checks, 0 violations", fixtures.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        ("isoperimetric reproduction", isoperimetric),
        ("Frechet offset fixture", frechet_offset),
        ("discrete Frechet oracle equivalence", discrete_oracle),
        ("volume and surface Lipschitz", volume_lipschitz),
        ("space contracts", space_contracts),
        ("graph evaluation round trip", graph_round_trip),
        ("optimizer soundness", optimizer),
        ("loop Frechet shift", loop_shift),
        ("name-layer property suite", name_layer),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match verdict {
            Ok(detail) => println!("criterion {}: PASS  {title}: {detail} ({t:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {title}: {why} ({t:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
