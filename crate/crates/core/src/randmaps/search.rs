use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::interval_maps::description::MapDescription;
use crate::interval_maps::{Envelope, PiecewiseMonotoneMap};
use crate::measures::PiecewiseConstantDensity;
use crate::rational::{self, q, qi, Q};
use crate::transfer::fp_apply;

use super::report::{FeasibilityReport, Verdict, Witness};

/// Default number of grid cells for the two-valued search.
pub const DEFAULT_SEARCH_GRID: usize = 1 << 10;
const NODE_LIMIT: usize = 1_000_000;
const LOCAL_LIMIT: usize = 20;

/// Contribution of a cell to one atom under each choice.
#[derive(Debug, Clone)]
struct Entry {
    atom: usize,
    lower: Q,
    upper: Q,
}

struct Problem {
    atoms: Vec<Q>,
    targets: Vec<Q>,
    by_cell: Vec<Vec<Entry>>,
    by_atom: Vec<Vec<(usize, Q, Q)>>,
}

fn contributions(map: &PiecewiseMonotoneMap, cells: &[Q], f: &PiecewiseConstantDensity, atoms: &[Q]) -> Vec<Vec<(usize, Q)>> {
    let mut out = Vec::with_capacity(cells.len() - 1);
    for (i, w) in cells.windows(2).enumerate() {
        let b = &map.branches()[i];
        let mid = (&w[0] + &w[1]) / qi(2);
        let weight = f.eval(&mid) / b.slope().unwrap().abs();
        let mut row = Vec::new();
        if !weight.is_zero() {
            let (u, v) = (b.eval_exact(&w[0]).unwrap(), b.eval_exact(&w[1]).unwrap());
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            let start = atoms.binary_search(&lo).unwrap();
            let end = atoms.binary_search(&hi).unwrap();
            for a in start..end {
                row.push((a, weight.clone()));
            }
        }
        out.push(row);
    }
    out
}

fn build(lower: &PiecewiseMonotoneMap, upper: &PiecewiseMonotoneMap, cells: &[Q], f: &PiecewiseConstantDensity) -> Problem {
    let mut points: BTreeSet<Q> = f.breakpoints().iter().cloned().collect();
    points.insert(qi(0));
    points.insert(qi(1));
    for m in [lower, upper] {
        for (i, x) in cells.iter().enumerate() {
            if i > 0 {
                points.insert(m.branches()[i - 1].eval_exact(x).unwrap());
            }
            if i + 1 < cells.len() {
                points.insert(m.branches()[i].eval_exact(x).unwrap());
            }
        }
    }
    let atoms: Vec<Q> = points.into_iter().collect();
    let targets = atoms.windows(2).map(|w| f.eval(&((&w[0] + &w[1]) / qi(2)))).collect();
    let cl = contributions(lower, cells, f, &atoms);
    let cu = contributions(upper, cells, f, &atoms);
    let mut by_cell = Vec::with_capacity(cl.len());
    let mut by_atom: Vec<Vec<(usize, Q, Q)>> = vec![Vec::new(); atoms.len() - 1];
    for (c, (l, u)) in cl.into_iter().zip(cu).enumerate() {
        let mut merged: Vec<Entry> = Vec::new();
        for (a, w) in l {
            merged.push(Entry { atom: a, lower: w, upper: Q::zero() });
        }
        for (a, w) in u {
            match merged.iter_mut().find(|e| e.atom == a) {
                Some(e) => e.upper = w,
                None => merged.push(Entry { atom: a, lower: Q::zero(), upper: w }),
            }
        }
        for e in &merged {
            by_atom[e.atom].push((c, e.lower.clone(), e.upper.clone()));
        }
        by_cell.push(merged);
    }
    Problem { atoms, targets, by_cell, by_atom }
}

/// Distinct sums reachable at an atom over every choice of its cells.
fn reachable(entries: &[(usize, Q, Q)]) -> BTreeSet<Q> {
    let mut sums = BTreeSet::new();
    sums.insert(Q::zero());
    for (_, l, u) in entries {
        sums = sums.iter().flat_map(|s| [s + l, s + u]).collect();
    }
    sums
}

struct Search<'a> {
    p: &'a Problem,
    assigned: Vec<Q>,
    lo_rest: Vec<Q>,
    hi_rest: Vec<Q>,
    choice: Vec<Option<bool>>,
    nodes: usize,
}

impl<'a> Search<'a> {
    fn new(p: &'a Problem) -> Self {
        let n = p.targets.len();
        let mut lo_rest = vec![Q::zero(); n];
        let mut hi_rest = vec![Q::zero(); n];
        for (a, entries) in p.by_atom.iter().enumerate() {
            for (_, l, u) in entries {
                lo_rest[a] += rational::min(l, u);
                hi_rest[a] += rational::max(l, u);
            }
        }
        Search { p, assigned: vec![Q::zero(); n], lo_rest, hi_rest, choice: vec![None; p.by_cell.len()], nodes: 0 }
    }

    fn consistent(&self, a: usize) -> bool {
        let t = &self.p.targets[a];
        &self.assigned[a] + &self.lo_rest[a] <= *t && *t <= &self.assigned[a] + &self.hi_rest[a]
    }

    fn apply(&mut self, c: usize, upper: bool, sign: i64) {
        let s = qi(sign);
        for e in &self.p.by_cell[c] {
            let v = if upper { &e.upper } else { &e.lower };
            self.assigned[e.atom] += &s * v;
            self.lo_rest[e.atom] -= &s * rational::min(&e.lower, &e.upper);
            self.hi_rest[e.atom] -= &s * rational::max(&e.lower, &e.upper);
        }
    }

    /// Depth-first over cells, lower choice first. `None` means the node limit was hit.
    fn run(&mut self) -> Option<bool> {
        let n = self.p.by_cell.len();
        let mut stack: Vec<(usize, bool)> = Vec::new();
        let mut c = 0;
        let mut next_upper = false;
        loop {
            if c == n {
                return Some(true);
            }
            self.nodes += 1;
            if self.nodes > NODE_LIMIT {
                return None;
            }
            self.apply(c, next_upper, 1);
            self.choice[c] = Some(next_upper);
            let ok = self.p.by_cell[c].iter().all(|e| self.consistent(e.atom));
            if ok {
                stack.push((c, next_upper));
                c += 1;
                next_upper = false;
                continue;
            }
            self.apply(c, next_upper, -1);
            self.choice[c] = None;
            if !next_upper {
                next_upper = true;
                continue;
            }
            // backtrack
            loop {
                match stack.pop() {
                    None => return Some(false),
                    Some((pc, pu)) => {
                        self.apply(pc, pu, -1);
                        self.choice[pc] = None;
                        if !pu {
                            c = pc;
                            next_upper = true;
                            break;
                        }
                    }
                }
            }
        }
    }
}

/// Looks for a selection that, on every cell of a grid refinement, follows
/// either the lower or the upper edge of an affine envelope and fixes `target`
/// under the transfer operator.
pub fn two_valued_selection_search(env: &Envelope, target: &PiecewiseConstantDensity, grid: usize) -> Result<FeasibilityReport> {
    if !env.is_affine() {
        return Err(Error::Unsupported("two-valued search needs an affine envelope".into()));
    }
    if grid == 0 {
        return Err(Error::Parameter("grid must be positive".into()));
    }
    let mut cells: BTreeSet<Q> = env.tau1().breakpoints().iter().cloned().collect();
    cells.extend((0..=grid).map(|k| q(k as i64, grid as i64)));
    cells.extend(target.breakpoints().iter().cloned());
    let cells: Vec<Q> = cells.into_iter().collect();
    let lower = env.tau1().refine(&cells)?;
    let upper = env.tau2().refine(&cells)?;
    let p = build(&lower, &upper, &cells, target);

    for (a, entries) in p.by_atom.iter().enumerate() {
        if entries.len() > LOCAL_LIMIT {
            continue;
        }
        let sums = reachable(entries);
        if !sums.contains(&p.targets[a]) {
            let x = (&p.atoms[a] + &p.atoms[a + 1]) / qi(2);
            let reason = format!(
                "at x = {} the transfer sum must equal {} but the {} cells mapping onto x reach only {} values",
                rational::format_q(&x),
                rational::format_q(&p.targets[a]),
                entries.len(),
                sums.len()
            );
            let witness = Witness::Point { x, target: p.targets[a].clone(), reachable: sums.into_iter().collect(), reason };
            return Ok(FeasibilityReport::new(Verdict::Infeasible, Some(witness), "no two-valued selection fixes the target"));
        }
    }

    let mut search = Search::new(&p);
    match search.run() {
        None => Ok(FeasibilityReport::new(Verdict::Inconclusive, None, format!("search stopped after {NODE_LIMIT} nodes"))),
        Some(false) => Ok(FeasibilityReport::new(Verdict::Infeasible, None, "exhaustive search over cell choices found no solution")),
        Some(true) => {
            let branches = search
                .choice
                .iter()
                .enumerate()
                .map(|(i, u)| if u.unwrap() { upper.branches()[i].clone() } else { lower.branches()[i].clone() })
                .collect();
            let selection = PiecewiseMonotoneMap::new(branches)?.merged();
            let pushed = fp_apply(&selection, target)?;
            if !pushed.same_density(target) || pushed.values().iter().any(|v| v.is_negative()) {
                return Err(Error::Assertion("found selection does not fix the target".into()));
            }
            let map = MapDescription::of(&selection, 0);
            Ok(FeasibilityReport::new(Verdict::Feasible, Some(Witness::Selection { map }), "selection fixes the target exactly"))
        }
    }
}

/// The map stored in a feasible report.
pub fn selection_of(report: &FeasibilityReport) -> Option<Result<PiecewiseMonotoneMap>> {
    match &report.witness {
        Some(Witness::Selection { map }) => Some(map.build()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::registry;
    use crate::interval_maps::{sup_difference_exact, validate_envelope};

    fn ex21() -> Envelope {
        validate_envelope(&registry::ex21_tau1(), &registry::ex21_tau2()).unwrap()
    }

    #[test]
    fn lebesgue_is_out_of_reach() {
        let r = two_valued_selection_search(&ex21(), &PiecewiseConstantDensity::uniform(), 64).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible);
        assert!(matches!(r.witness, Some(Witness::Point { .. })));
    }

    #[test]
    fn lower_density_selects_lower_map() {
        let f1 = registry::get("ex2.1/f1").unwrap().into_density().unwrap();
        let r = two_valued_selection_search(&ex21(), &f1, 64).unwrap();
        assert_eq!(r.verdict, Verdict::Feasible);
        let sel = selection_of(&r).unwrap().unwrap();
        assert!(sup_difference_exact(&sel, &registry::ex21_tau1()).unwrap().is_zero());
    }

    #[test]
    fn tent_envelope_gives_tent() {
        let t = PiecewiseMonotoneMap::tent();
        let env = validate_envelope(&t, &t).unwrap();
        let r = two_valued_selection_search(&env, &PiecewiseConstantDensity::uniform(), 32).unwrap();
        assert!(r.feasible);
        let sel = selection_of(&r).unwrap().unwrap();
        assert!(sup_difference_exact(&sel, &t).unwrap().is_zero());
    }
}
