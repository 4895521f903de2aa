//! Randomized property suite behind `cms selftest`. Every property draws
//! its cases from one seeded generator, so a seed reproduces a run exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use cms_core::convex::{hausdorff_convex, hull, volume};
use cms_core::expr::{random_expr, to_function, Window};
use cms_core::frechet::discrete_frechet;
use cms_core::functions::{eval_from_graph, graph_from_function};
use cms_core::names::{
    check_cover, check_point_consistency, check_standard, finite_hausdorff, point_to_singleton, select_point,
    singleton_to_point, standardize, union, OracleSet, SetFixture,
};
use cms_core::optimize::{maximize, OptProblem};
use cms_core::spaces::{covering_check, cube, real_point, rounding_check, SpaceId};
use cms_core::{Dyadic, DyadicInterval, PointName};

use crate::Report;

const SET_FIXTURES: &str = include_str!("../../../fixtures/sets.json");

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn dyadic_field(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    for _ in 0..cases {
        let a = Dyadic::ratio(rng.gen_range(-1000..1000), rng.gen_range(0..40));
        let b = Dyadic::ratio(rng.gen_range(-1000..1000), rng.gen_range(0..40));
        ensure(&(&a + &b) - &b == a, || format!("({a} + {b}) - {b} != {a}"))?;
        ensure((&a * &b).to_rational() == a.to_rational() * b.to_rational(), || format!("{a} * {b} is inexact"))?;
        let text = a.to_string();
        ensure(text.parse::<Dyadic>().map_err(err)? == a, || format!("{text} does not round-trip"))?;
    }
    Ok(format!("{cases} cases"))
}

fn space_contracts() -> Check {
    let mut checked = 0;
    for id in ["interval", "circle", "cantor", "cube:2"] {
        let s = id.parse::<SpaceId>().map_err(err)?.build().map_err(err)?;
        for m in 0..=6 {
            let c = covering_check(&s, m, m + 3);
            ensure(c.ok, || format!("{id} covering fails at level {m} (worst {})", c.worst))?;
            let r = rounding_check(&s, m, 2);
            ensure(r.ok, || format!("{id} rounding fails at level {m} (worst {})", r.worst))?;
            checked += c.checked + r.checked;
        }
    }
    Ok(format!("{checked} probes"))
}

fn name_layer() -> Check {
    let fixtures: Vec<SetFixture> = serde_json::from_str(SET_FIXTURES).map_err(err)?;
    for (i, f) in fixtures.iter().enumerate() {
        let oracle = OracleSet::from_fixture(f).map_err(err)?;
        let space = oracle.space().clone();
        let top = if space.arity() > 1 { 4 } else { 7 };
        let name = oracle.name();
        let std = standardize(&name);
        let first = PointName::of_point(&space, oracle.defining_points()[0].clone()).map_err(err)?;
        let joined = union(&name, &point_to_singleton(&first)).map_err(err)?;
        for m in 0..=top {
            for (what, n) in [("name", &name), ("standardized", &std)] {
                let c = check_cover(n, &oracle, m, 3).map_err(err)?;
                ensure(c.ok, || format!("fixture {i}: {what} cover at level {m}: {}", c.detail))?;
                let s = check_standard(n, &oracle, m).map_err(err)?;
                ensure(s.ok, || format!("fixture {i}: {what} window at level {m}: {}", s.detail))?;
            }
            let c = check_cover(&joined, &oracle, m, 3).map_err(err)?;
            ensure(c.ok, || format!("fixture {i}: union with a member at level {m}: {}", c.detail))?;
            for k in 0..m {
                let gap = finite_hausdorff(&space, &name.points(m).map_err(err)?, &name.points(k).map_err(err)?);
                let bound = Dyadic::pow2(m as i64) + Dyadic::pow2(k as i64);
                ensure(gap <= bound, || format!("fixture {i}: levels {k} and {m} are {gap} apart"))?;
            }
        }
        let x = select_point(&name);
        let c = check_point_consistency(&x, top).map_err(err)?;
        ensure(c.ok, || format!("fixture {i}: selected point: {}", c.detail))?;
        let d = oracle.distance_to(&x.point(top).map_err(err)?);
        ensure(d <= Dyadic::pow2(top as i64 - 1), || format!("fixture {i}: selected point is {d} from the set"))?;
        let back = singleton_to_point(&point_to_singleton(&first));
        for m in 0..=top {
            let d = space.distance(&back.point(m).map_err(err)?, &first.point(m).map_err(err)?);
            ensure(d <= Dyadic::pow2(m as i64 - 1), || format!("fixture {i}: singleton round trip at level {m}"))?;
        }
    }
    Ok(format!("{} fixtures", fixtures.len()))
}

/// Exhaustive minimum over monotone couplings.
fn brute_frechet(p: &[Vec<Dyadic>], q: &[Vec<Dyadic>], i: usize, j: usize) -> Dyadic {
    let here = p[i].iter().zip(&q[j]).map(|(a, b)| (a - b).abs()).max().unwrap();
    let mut next: Vec<Dyadic> = Vec::new();
    if i + 1 < p.len() {
        next.push(brute_frechet(p, q, i + 1, j));
    }
    if j + 1 < q.len() {
        next.push(brute_frechet(p, q, i, j + 1));
    }
    if i + 1 < p.len() && j + 1 < q.len() {
        next.push(brute_frechet(p, q, i + 1, j + 1));
    }
    match next.into_iter().min() {
        Some(rest) => here.max_with(&rest),
        None => here,
    }
}

fn discrete_frechet_oracle(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let poly = |rng: &mut ChaCha8Rng| -> Vec<Vec<Dyadic>> {
        let len = rng.gen_range(1..=6);
        (0..len).map(|_| vec![Dyadic::ratio(rng.gen_range(0..32), 5), Dyadic::ratio(rng.gen_range(0..32), 5)]).collect()
    };
    for _ in 0..cases {
        let (p, q) = (poly(rng), poly(rng));
        let dp = discrete_frechet(&p, &q).map_err(err)?.value;
        let bf = brute_frechet(&p, &q, 0, 0);
        ensure(dp == bf, || format!("dynamic program gives {dp}, exhaustive search {bf}"))?;
    }
    Ok(format!("{cases} pairs"))
}

fn expression_soundness(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    for _ in 0..cases {
        let e = random_expr(rng, 2, 3);
        let bx: Vec<DyadicInterval> = (0..2)
            .map(|_| {
                let a = Dyadic::ratio(rng.gen_range(0..=16), 4);
                let b = Dyadic::ratio(rng.gen_range(0..=16), 4);
                DyadicInterval::spanning(a, b)
            })
            .collect();
        let enc = e.eval_interval(&bx);
        for _ in 0..16 {
            let x: Vec<Dyadic> = bx
                .iter()
                .map(|b| {
                    let t = Dyadic::ratio(rng.gen_range(0..=64), 6);
                    b.lo() + &(&b.width() * &t)
                })
                .collect();
            let v = e.eval_point(&x);
            ensure(enc.contains(&v), || format!("{e} evaluates to {v}, outside {enc}"))?;
        }
    }
    Ok(format!("{cases} expressions"))
}

fn graph_round_trip(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let n = 8;
    let y = cms_core::spaces::unit_interval();
    for _ in 0..cases.min(10) {
        let e = random_expr(rng, 1, 2);
        let f = to_function(&e, 1, &Window::fit(&e.range(1))).map_err(err)?;
        let g = graph_from_function(&f);
        for _ in 0..4 {
            let x = real_point(&[Dyadic::ratio(rng.gen_range(0..=256), 8)]);
            let name = PointName::of_point(&cube(1), x).map_err(err)?;
            let a = y.point(f.eval(&name, n).map_err(err)?);
            let b = y.point(eval_from_graph(&g, &name, n).map_err(err)?);
            let gap = y.distance(&a, &b);
            ensure(gap <= Dyadic::pow2(n as i64 - 1), || format!("{e}: graph and direct values differ by {gap}"))?;
        }
    }
    Ok(format!("{} functions", cases.min(10)))
}

fn volume_lipschitz(rng: &mut ChaCha8Rng, cases: usize) -> Check {
    let body = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(3..9);
        let pts: Vec<Vec<Dyadic>> =
            (0..k).map(|_| (0..2).map(|_| Dyadic::ratio(rng.gen_range(0..=64), 6)).collect()).collect();
        hull(&pts)
    };
    for _ in 0..cases {
        let (v, w) = (body(rng).map_err(err)?, body(rng).map_err(err)?);
        let h = hausdorff_convex(&v, &w, 20).map_err(err)?;
        let diff = volume(&v) - volume(&w);
        let bound = (Dyadic::from_int(4) * h.hi().clone() + Dyadic::pow2(16)).to_rational();
        ensure(diff.clone() <= bound && -diff <= bound, || "volume difference exceeds 4 * Hausdorff".to_string())?;
    }
    Ok(format!("{cases} pairs"))
}

fn optimizer_fixtures() -> Check {
    let fixtures = [
        ("x0", "x0 - 1/2", "1/2", 1),
        ("1 - abs(x0 - 1/4)", "x0 - 1", "1", 1),
        ("(x0 + x1) * 1/2", "max(x0, x1) - 1/2", "1/2", 2),
    ];
    for (obj, con, opt, dim) in fixtures {
        let p = OptProblem::parse(dim, obj, con).map_err(err)?;
        let opt: Dyadic = opt.parse().map_err(err)?;
        for budget in [10, 100_000] {
            let r = maximize(&p, 10, budget).map_err(err)?;
            ensure(r.hi >= opt && r.lo.as_ref().is_none_or(|l| l <= &opt), || format!("maximize {obj} misses {opt}"))?;
        }
    }
    Ok("3 problems".into())
}

/// Runs every property and reports one line per property.
pub fn run(seed: u64, cases: usize) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let results: Vec<(&str, Check)> = vec![
        ("dyadic-arithmetic", dyadic_field(&mut rng, cases)),
        ("space-contracts", space_contracts()),
        ("name-layer", name_layer()),
        ("discrete-frechet", discrete_frechet_oracle(&mut rng, cases)),
        ("expression-enclosures", expression_soundness(&mut rng, cases)),
        ("graph-evaluation", graph_round_trip(&mut rng, cases)),
        ("volume-lipschitz", volume_lipschitz(&mut rng, cases)),
        ("optimizer", optimizer_fixtures()),
    ];
    let mut rep = Report::new().put("seed", json!(seed));
    for (name, res) in results {
        let line = match res {
            Ok(detail) => format!("pass ({detail})"),
            Err(why) => {
                rep.ok = false;
                format!("FAIL: {why}")
            }
        };
        rep = rep.put(name, json!(line));
    }
    let ok = rep.ok;
    rep.put("ok", json!(ok))
}
