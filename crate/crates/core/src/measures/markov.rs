use std::collections::{BTreeSet, VecDeque};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_maps::PiecewiseMonotoneMap;
use crate::rational::{self, Q};

use super::linalg::null_space;
use super::PiecewiseConstantDensity;

/// Largest partition the forward closure may produce before giving up.
const MAX_PARTITION: usize = 4096;

/// A partition on which every branch maps each cell onto a union of consecutive cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovStructure {
    #[serde(with = "rational::serde_q::vec")]
    partition: Vec<Q>,
    /// For each cell, the cells covered by its image.
    incidence: Vec<Vec<usize>>,
    /// For each cell, the branch of the map carrying it.
    branch_of_cell: Vec<usize>,
}

impl MarkovStructure {
    /// Finds the coarsest partition containing the breakpoints that is closed under
    /// one-sided images.
    pub fn discover(map: &PiecewiseMonotoneMap) -> Result<Self> {
        if !map.is_affine() {
            return Err(Error::Unsupported("Markov structure needs affine branches".into()));
        }
        if !map.is_unit_domain() {
            return Err(Error::Unsupported("Markov structure needs a map on [0, 1]".into()));
        }
        let mut points: BTreeSet<Q> = map.breakpoints().iter().cloned().collect();
        let mut queue: VecDeque<Q> = points.iter().cloned().collect();
        while let Some(p) = queue.pop_front() {
            for b in map.branches().iter().filter(|b| b.domain().contains(&p)) {
                let y = b.eval_exact(&p).unwrap();
                if points.insert(y.clone()) {
                    if points.len() > MAX_PARTITION {
                        return Err(Error::Structural(format!("no finite Markov partition with at most {MAX_PARTITION} points")));
                    }
                    queue.push_back(y);
                }
            }
        }
        Self::from_partition(map, points.into_iter().collect())
    }

    /// Checks that `partition` is Markov for `map` and records the incidence.
    pub fn from_partition(map: &PiecewiseMonotoneMap, partition: Vec<Q>) -> Result<Self> {
        if partition.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Structural("partition must be strictly increasing".into()));
        }
        if map.breakpoints().iter().any(|b| partition.binary_search(b).is_err()) {
            return Err(Error::Structural("partition must contain every breakpoint".into()));
        }
        let mut incidence = Vec::new();
        let mut branch_of_cell = Vec::new();
        for w in partition.windows(2) {
            let j = map.branches().iter().position(|b| b.domain().lo <= w[0] && w[1] <= b.domain().hi).unwrap();
            let b = &map.branches()[j];
            let (u, v) = (b.eval_exact(&w[0]).unwrap(), b.eval_exact(&w[1]).unwrap());
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            let (Ok(i0), Ok(i1)) = (partition.binary_search(&lo), partition.binary_search(&hi)) else {
                return Err(Error::Structural(format!(
                    "image of [{}, {}] is not a union of partition cells",
                    rational::format_q(&w[0]),
                    rational::format_q(&w[1])
                )));
            };
            incidence.push((i0..i1).collect());
            branch_of_cell.push(j);
        }
        Ok(MarkovStructure { partition, incidence, branch_of_cell })
    }

    pub fn partition(&self) -> &[Q] {
        &self.partition
    }

    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    pub fn cells(&self) -> usize {
        self.incidence.len()
    }

    /// Closed communicating classes of the cell graph.
    fn closed_classes(&self) -> Vec<Vec<usize>> {
        let n = self.cells();
        let mut reach = vec![vec![false; n]; n];
        for (s, row) in reach.iter_mut().enumerate() {
            let mut stack = vec![s];
            row[s] = true;
            while let Some(i) = stack.pop() {
                for &k in &self.incidence[i] {
                    if !row[k] {
                        row[k] = true;
                        stack.push(k);
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let class: Vec<usize> = (0..n).filter(|&k| reach[s][k] && reach[k][s]).collect();
            for &k in &class {
                seen[k] = true;
            }
            let closed = class.iter().all(|&i| (0..n).all(|k| !reach[i][k] || class.contains(&k)));
            if closed {
                out.push(class);
            }
        }
        out
    }
}

/// Exact stationary density of the transfer operator on the cells of `structure`.
pub fn markov_invariant_density(map: &PiecewiseMonotoneMap, structure: &MarkovStructure) -> Result<PiecewiseConstantDensity> {
    let checked = MarkovStructure::from_partition(map, structure.partition.clone())?;
    if checked != *structure {
        return Err(Error::Structural("structure does not belong to this map".into()));
    }
    let n = structure.cells();
    let weight: Vec<Q> = structure
        .branch_of_cell
        .iter()
        .map(|&j| {
            let s = map.branches()[j].slope().unwrap();
            rational::qi(1) / s.abs()
        })
        .collect();
    let lengths: Vec<Q> = structure.partition.windows(2).map(|w| &w[1] - &w[0]).collect();
    let mut basis = Vec::new();
    for class in structure.closed_classes() {
        let m = class.len();
        let local = |k: usize| class.iter().position(|&c| c == k);
        // row k: Σ_{i → k} w_i d_i − d_k = 0
        let mut a = vec![vec![Q::zero(); m]; m];
        for (li, &i) in class.iter().enumerate() {
            a[li][li] -= rational::qi(1);
            for &k in &structure.incidence[i] {
                if let Some(lk) = local(k) {
                    a[lk][li] += &weight[i];
                }
            }
        }
        let ns = null_space(a, m);
        if ns.len() != 1 {
            return Err(Error::Structural(format!("closed class has a {}-dimensional fixed space", ns.len())));
        }
        let v = &ns[0];
        let mass: Q = class.iter().zip(v).map(|(&i, x)| &lengths[i] * x).sum();
        let mut values = vec![Q::zero(); n];
        for (&i, x) in class.iter().zip(v) {
            values[i] = x / &mass;
        }
        if values.iter().any(|x| x.is_negative()) {
            return Err(Error::Structural("fixed vector has mixed signs".into()));
        }
        basis.push(PiecewiseConstantDensity::new(structure.partition.clone(), values)?.canonical());
    }
    match basis.len() {
        1 => Ok(basis.pop().unwrap()),
        0 => Err(Error::Structural("no invariant density found".into())),
        d => Err(Error::Ambiguous { dimension: d, basis }),
    }
}

/// [`MarkovStructure::discover`] followed by [`markov_invariant_density`].
pub fn invariant_density(map: &PiecewiseMonotoneMap) -> Result<PiecewiseConstantDensity> {
    markov_invariant_density(map, &MarkovStructure::discover(map)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn tent_preserves_lebesgue() {
        let d = invariant_density(&PiecewiseMonotoneMap::tent()).unwrap();
        assert_eq!(d, PiecewiseConstantDensity::uniform());
    }

    #[test]
    fn two_invariant_pieces_are_ambiguous() {
        // x ↦ 2x mod 1/2 on each half: two ergodic components
        let m = PiecewiseMonotoneMap::affine(&[
            (qi(0), q(1, 4), qi(2), qi(0)),
            (q(1, 4), q(1, 2), qi(2), q(-1, 2)),
            (q(1, 2), q(3, 4), qi(2), q(-1, 2)),
            (q(3, 4), qi(1), qi(2), qi(-1)),
        ])
        .unwrap();
        match invariant_density(&m) {
            Err(Error::Ambiguous { dimension, basis }) => {
                assert_eq!(dimension, 2);
                assert!(basis.iter().all(|b| b.mass() == qi(1)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transient_cells_carry_no_mass() {
        // [1/2, 1] falls onto [0, 1/2] which is invariant under 2x
        let m = PiecewiseMonotoneMap::affine(&[
            (qi(0), q(1, 4), qi(2), qi(0)),
            (q(1, 4), q(1, 2), qi(-2), qi(1)),
            (q(1, 2), qi(1), qi(-1), qi(1)),
        ])
        .unwrap();
        let d = invariant_density(&m).unwrap();
        assert_eq!(d.values(), &[qi(2), qi(0)]);
    }

    #[test]
    fn rejects_non_markov_partition() {
        let m = PiecewiseMonotoneMap::tent();
        assert!(MarkovStructure::from_partition(&m, vec![qi(0), q(1, 3), q(1, 2), qi(1)]).is_err());
    }
}
