//! Certified constrained maximization over the unit cube by interval
//! branch-and-bound.
//!
//! The optimizer encloses `max { L(x) : F(x) <= 0 }` for expressions `L`
//! and `F`. Cells whose constraint enclosure lies above zero are discarded;
//! the remaining cells bound the optimum from above, while cells with
//! certified feasibility (and exactly evaluated feasible midpoints) bound it
//! from below.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dyadic::{Dyadic, DyadicInterval};
use crate::expr::{unit_box, Expr, ExprError};
use crate::names::{NameError, SetName};
use crate::spaces::cube;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("dimension must be at least 1")]
    Dimension,
    #[error("expression uses coordinate x{} but the cube has dimension {dim}", needed - 1)]
    Arity { needed: usize, dim: usize },
    #[error("{which} range {range} leaves its window {window}")]
    Window { which: &'static str, range: Box<DyadicInterval>, window: Box<DyadicInterval> },
    #[error("the constraint is nowhere satisfied")]
    Infeasible,
    #[error("budget of {budget} cells exhausted")]
    Budget { budget: usize },
}

/// A maximization problem over `[0,1]^dim`. The objective range must lie in
/// `[0,1]` and the constraint range in `[-1,1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptProblem {
    dim: usize,
    objective: Expr,
    constraint: Expr,
}

impl OptProblem {
    pub fn new(dim: usize, objective: Expr, constraint: Expr) -> Result<OptProblem, OptError> {
        if dim == 0 {
            return Err(OptError::Dimension);
        }
        let windows = [
            ("objective", &objective, DyadicInterval::unit()),
            ("constraint", &constraint, DyadicInterval::new(Dyadic::from_int(-1), Dyadic::one()).unwrap()),
        ];
        for (which, e, window) in windows {
            if e.arity() > dim {
                return Err(OptError::Arity { needed: e.arity(), dim });
            }
            let range = e.range(dim);
            if !window.contains_interval(&range) {
                return Err(OptError::Window { which, range: Box::new(range), window: Box::new(window) });
            }
        }
        Ok(OptProblem { dim, objective, constraint })
    }

    pub fn parse(dim: usize, objective: &str, constraint: &str) -> Result<OptProblem, OptError> {
        OptProblem::new(dim, crate::expr::parse(objective)?, crate::expr::parse(constraint)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &Expr {
        &self.objective
    }

    pub fn constraint(&self) -> &Expr {
        &self.constraint
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Infeasible,
    CertifiedFeasible,
    Undecided,
}

/// A box of the cube with enclosures of both expressions on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub bounds: Vec<DyadicInterval>,
    pub objective: DyadicInterval,
    pub constraint: DyadicInterval,
}

impl Cell {
    fn new(p: &OptProblem, bounds: Vec<DyadicInterval>) -> Cell {
        let objective = p.objective.eval_interval(&bounds);
        let constraint = p.constraint.eval_interval(&bounds);
        Cell { bounds, objective, constraint }
    }

    pub fn status(&self) -> CellStatus {
        if self.constraint.lo().is_positive() {
            CellStatus::Infeasible
        } else if !self.constraint.hi().is_positive() {
            CellStatus::CertifiedFeasible
        } else {
            CellStatus::Undecided
        }
    }

    /// Largest side length, which is also the max-metric diameter.
    pub fn width(&self) -> Dyadic {
        self.bounds.iter().map(DyadicInterval::width).max().unwrap()
    }

    fn split(&self, p: &OptProblem) -> [Cell; 2] {
        let widths: Vec<Dyadic> = self.bounds.iter().map(DyadicInterval::width).collect();
        let widest = widths.iter().max().unwrap();
        let axis = widths.iter().position(|w| w == widest).unwrap();
        let b = &self.bounds[axis];
        let mid = b.midpoint();
        let mut left = self.bounds.clone();
        let mut right = self.bounds.clone();
        left[axis] = DyadicInterval::new(b.lo().clone(), mid.clone()).unwrap();
        right[axis] = DyadicInterval::new(mid, b.hi().clone()).unwrap();
        [Cell::new(p, left), Cell::new(p, right)]
    }

    fn midpoint(&self) -> Vec<Dyadic> {
        self.bounds.iter().map(DyadicInterval::midpoint).collect()
    }
}

/// Heap entry: highest objective bound first, then the lexicographically
/// smallest box, so the processing order is canonical.
struct Queued(Cell);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |c: &Cell| c.bounds.iter().map(|b| (b.lo().clone(), b.hi().clone())).collect::<Vec<_>>();
        self.0.objective.hi().cmp(other.0.objective.hi()).then_with(|| key(&other.0).cmp(&key(&self.0)))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptStatus {
    Converged,
    Unconverged,
    InfeasibleAtBudget,
}

impl fmt::Display for OptStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptStatus::Converged => "converged",
            OptStatus::Unconverged => "unconverged",
            OptStatus::InfeasibleAtBudget => "infeasible-at-budget",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    /// A value attained at a feasible point; absent when none was found.
    pub lo: Option<Dyadic>,
    /// An upper bound on the objective over the feasible set.
    pub hi: Dyadic,
    /// Box on which `lo` is certified: every point is feasible and has
    /// objective value at least `lo`.
    pub witness: Option<Vec<DyadicInterval>>,
    pub status: OptStatus,
    /// Number of cells bisected.
    pub expansions: usize,
}

impl OptResult {
    /// The enclosure of the optimum, once a feasible point is known.
    pub fn interval(&self) -> Option<DyadicInterval> {
        self.lo.clone().map(|lo| DyadicInterval::new(lo, self.hi.clone()).expect("lower bound below upper bound"))
    }
}

/// Encloses the maximum of the objective over the feasible set, stopping
/// once the enclosure is `2^-n` wide or after `budget` bisections.
pub fn maximize(p: &OptProblem, n: u32, budget: usize) -> Result<OptResult, OptError> {
    let tol = Dyadic::pow2(n as i64);
    let mut heap = BinaryHeap::new();
    let mut lo: Option<Dyadic> = None;
    let mut witness = None;
    let mut hi = p.objective.range(p.dim).hi().clone();
    let mut expansions = 0;

    let consider = |c: &Cell, lo: &mut Option<Dyadic>, witness: &mut Option<Vec<DyadicInterval>>| {
        let mut offer = |v: Dyadic, w: Vec<DyadicInterval>| {
            if lo.as_ref().is_none_or(|l| &v > l) {
                *lo = Some(v);
                *witness = Some(w);
            }
        };
        if c.status() == CellStatus::CertifiedFeasible {
            offer(c.objective.lo().clone(), c.bounds.clone());
        }
        let mid = c.midpoint();
        if !p.constraint.eval_point(&mid).is_positive() {
            offer(p.objective.eval_point(&mid), mid.into_iter().map(DyadicInterval::point).collect());
        }
    };

    let root = Cell::new(p, unit_box(p.dim));
    if root.status() != CellStatus::Infeasible {
        consider(&root, &mut lo, &mut witness);
        heap.push(Queued(root));
    }
    let status = loop {
        let Some(top) = heap.peek() else {
            if lo.is_none() {
                return Err(OptError::Infeasible);
            }
            // only reachable when every remaining cell was infeasible
            break OptStatus::Converged;
        };
        hi = hi.min_with(top.0.objective.hi());
        if let Some(l) = &lo {
            if &hi - l <= tol {
                break OptStatus::Converged;
            }
        }
        if expansions >= budget {
            break if lo.is_some() { OptStatus::Unconverged } else { OptStatus::InfeasibleAtBudget };
        }
        let Queued(cell) = heap.pop().unwrap();
        expansions += 1;
        for child in cell.split(p) {
            if child.status() != CellStatus::Infeasible {
                consider(&child, &mut lo, &mut witness);
                heap.push(Queued(child));
            }
        }
    };
    if let Some(l) = &lo {
        hi = hi.max_with(l);
    }
    Ok(OptResult { lo, hi, witness, status, expansions })
}

/// Cover of `{F <= 0}` by level-`m` indices of the cube, built from all
/// non-infeasible cells of width at most `2^-(m+1)`. Every feasible point
/// is within `2^-m` of the cover; cover points are within `2^-m` of some
/// cell that was not excluded. At most `budget` cells are examined.
pub fn feasible_region(p: &OptProblem, m: u32, budget: usize) -> Result<SetName, OptError> {
    let target = Dyadic::pow2(m as i64 + 1);
    let mut done: Vec<Cell> = Vec::new();
    let mut work = vec![Cell::new(p, unit_box(p.dim))];
    let mut examined = 0;
    while let Some(c) = work.pop() {
        examined += 1;
        if examined > budget {
            return Err(OptError::Budget { budget });
        }
        if c.status() == CellStatus::Infeasible {
            continue;
        }
        if c.width() <= target {
            done.push(c);
        } else {
            let [a, b] = c.split(p);
            work.push(b);
            work.push(a);
        }
    }
    if done.is_empty() {
        return Err(OptError::Infeasible);
    }
    let space = cube(p.dim);
    let boxes: Vec<(Vec<Dyadic>, Vec<Dyadic>)> = done
        .into_iter()
        .map(|c| (c.bounds.iter().map(|b| b.lo().clone()).collect(), c.bounds.iter().map(|b| b.hi().clone()).collect()))
        .collect();
    let s2 = space.clone();
    Ok(SetName::from_fn(space, false, move |level| {
        if level != m {
            return Err(NameError::Contract(format!("feasible region was computed for level {m}, not {level}")));
        }
        let mut out = Vec::new();
        for (lo, hi) in &boxes {
            out.extend(s2.box_query(lo, hi, &target, m).expect("cubes support box queries"));
        }
        Ok(out)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::{finite_hausdorff, OracleSet};
    use crate::spaces::{real_point, reals};
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn fixtures() -> Vec<(OptProblem, Dyadic)> {
        vec![
            (OptProblem::parse(1, "x0", "x0 - 1/2").unwrap(), d("1/2")),
            (OptProblem::parse(1, "1 - abs(x0 - 1/4)", "x0 - 1").unwrap(), d("1")),
            (OptProblem::parse(2, "(x0 + x1) * 1/2", "max(x0, x1) - 1/2").unwrap(), d("1/2")),
        ]
    }

    #[test]
    fn fixtures_converge() {
        for (p, opt) in fixtures() {
            let r = maximize(&p, 10, 100_000).unwrap();
            assert_eq!(r.status, OptStatus::Converged);
            let iv = r.interval().unwrap();
            assert!(iv.contains(&opt), "{iv} misses {opt}");
            assert!(iv.width() <= Dyadic::pow2(10));
            let w = r.witness.unwrap();
            let at: Vec<Dyadic> = w.iter().map(|b| b.lo().clone()).collect();
            assert!(!p.constraint().eval_point(&at).is_positive());
        }
    }

    #[test]
    fn truncated_runs_stay_sound() {
        for (p, opt) in fixtures() {
            for budget in [0, 1, 2, 5, 17] {
                let r = maximize(&p, 30, budget).unwrap();
                assert!(r.hi >= opt);
                if let Some(lo) = &r.lo {
                    assert!(lo <= &opt);
                }
            }
        }
    }

    #[test]
    fn more_budget_never_widens() {
        for (p, _) in fixtures() {
            let mut prev: Option<OptResult> = None;
            for budget in 0..120 {
                let r = maximize(&p, 40, budget).unwrap();
                if let Some(q) = &prev {
                    assert!(r.hi <= q.hi);
                    assert!(r.lo >= q.lo);
                }
                prev = Some(r);
            }
        }
    }

    #[test]
    fn grid_oracle_matches_fixture() {
        let (p, _) = fixtures().remove(2);
        let r = maximize(&p, 12, 100_000).unwrap();
        let k = 7;
        let mut best = Dyadic::zero();
        for i in 0..=(1 << k) {
            for j in 0..=(1 << k) {
                let x = [Dyadic::ratio(i, k), Dyadic::ratio(j, k)];
                if !p.constraint().eval_point(&x).is_positive() {
                    best = best.max_with(&p.objective().eval_point(&x));
                }
            }
        }
        assert!(r.hi >= best);
        assert!(r.interval().unwrap().contains(&best));
    }

    #[test]
    fn constant_objective() {
        let p = OptProblem::parse(2, "3/8", "x0 * x1 - 1/4").unwrap();
        let r = maximize(&p, 10, 1000).unwrap();
        assert_eq!(r.status, OptStatus::Converged);
        assert!(r.interval().unwrap().contains(&d("3/8")));
    }

    #[test]
    fn contract_errors() {
        assert!(matches!(OptProblem::parse(1, "x0 + 1", "x0"), Err(OptError::Window { which: "objective", .. })));
        assert!(matches!(OptProblem::parse(1, "x1", "x0"), Err(OptError::Arity { needed: 2, dim: 1 })));
        assert!(matches!(OptProblem::parse(1, "x0", "1/3"), Err(OptError::Expr(_))));
        let p = OptProblem::parse(1, "x0", "1/2").unwrap();
        assert_eq!(maximize(&p, 4, 10), Err(OptError::Infeasible));
        // the constraint stays above 1/64 everywhere
        let p = OptProblem::parse(1, "x0", "abs(x0 - 5/16) * 1/2 + 1/64").unwrap();
        assert_eq!(maximize(&p, 4, 50), Err(OptError::Infeasible));
        let p = OptProblem::parse(1, "x0", "abs(x0 - 5/16) * abs(x0 - 5/16) - 1/4096").unwrap();
        let r = maximize(&p, 30, 3).unwrap();
        assert!(matches!(r.status, OptStatus::InfeasibleAtBudget | OptStatus::Unconverged));
    }

    fn region_check(p: &OptProblem, m: u32, oracle: &OracleSet) {
        let name = feasible_region(p, m, 1 << 20).unwrap();
        let pts = name.points(m).unwrap();
        let space = cube(p.dim());
        let samples = oracle.samples(m + 3);
        let miss = samples.iter().map(|s| pts.iter().map(|q| space.distance(s, q)).min().unwrap()).max().unwrap();
        assert!(miss <= Dyadic::pow2(m as i64), "a feasible point is {miss} from the cover");
        let far = pts.iter().map(|q| oracle.distance_to(q)).max().unwrap();
        assert!(far <= Dyadic::pow2(m as i64) + Dyadic::pow2(m as i64 + 1), "cover point {far} from the set");
        assert!(finite_hausdorff(&space, &pts, &samples) <= Dyadic::pow2(m as i64 - 1));
    }

    #[test]
    fn feasible_regions() {
        let interval = cube(1);
        let p = OptProblem::parse(1, "x0", "x0 - 1/2").unwrap();
        let o = OracleSet::hull(&interval, real_point(&[d("0")]), real_point(&[d("1/2")])).unwrap();
        for m in 1..7 {
            region_check(&p, m, &o);
        }
        let p = OptProblem::parse(1, "x0", "abs(x0 - 1/2) - 1/4").unwrap();
        let o = OracleSet::hull(&interval, real_point(&[d("1/4")]), real_point(&[d("3/4")])).unwrap();
        for m in 1..7 {
            region_check(&p, m, &o);
        }
    }

    #[test]
    fn feasible_region_l_shape() {
        let p = OptProblem::parse(2, "x0", "min(x0, x1) - 1/2").unwrap();
        let sq = cube(2);
        for m in 2..5 {
            let name = feasible_region(&p, m, 1 << 20).unwrap();
            let pts = name.points(m).unwrap();
            let inside = |x: &[Dyadic]| x[0] <= d("1/2") || x[1] <= d("1/2");
            // dense-grid membership oracle
            let k = m as i64 + 3;
            let grid: Vec<Vec<Dyadic>> = (0..=(1 << k))
                .flat_map(|i| (0..=(1 << k)).map(move |j| vec![Dyadic::ratio(i, k), Dyadic::ratio(j, k)]))
                .collect();
            let members: Vec<&Vec<Dyadic>> = grid.iter().filter(|x| inside(x)).collect();
            for x in &members {
                let near = pts.iter().any(|q| sq.distance(&real_point(x), q) <= Dyadic::pow2(m as i64));
                assert!(near);
            }
            for q in &pts {
                let q = reals(q).unwrap();
                let gap = members.iter().map(|x| (&x[0] - &q[0]).abs().max_with(&(&x[1] - &q[1]).abs())).min().unwrap();
                assert!(gap <= Dyadic::pow2(m as i64) + Dyadic::pow2(m as i64 + 1));
            }
        }
        assert!(matches!(feasible_region(&p, 12, 100), Err(OptError::Budget { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn affine_objectives_are_enclosed(a in 0i64..=3, b in 0i64..=3, c in 0i64..=2, t in 1i64..8, budget in 0usize..400) {
            let obj = format!("{a}/8 * x0 + {b}/8 * x1 + {c}/8");
            let con = format!("max(x0, x1) - {t}/8");
            let p = OptProblem::parse(2, &obj, &con).unwrap();
            let opt = Dyadic::ratio(a + b, 3) * Dyadic::ratio(t, 3) + Dyadic::ratio(c, 3);
            let r = maximize(&p, 10, budget).unwrap();
            prop_assert!(r.hi >= opt);
            if let Some(lo) = &r.lo {
                prop_assert!(lo <= &opt);
            }
            if r.status == OptStatus::Converged {
                prop_assert!(r.interval().unwrap().width() <= Dyadic::pow2(10));
            }
        }
    }
}
