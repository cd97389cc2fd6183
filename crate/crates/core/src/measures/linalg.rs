use num_traits::{One, Zero};

use crate::rational::Q;

/// Basis of the null space of a dense rational matrix (rows of equal length).
pub(crate) fn null_space(mut a: Vec<Vec<Q>>, cols: usize) -> Vec<Vec<Q>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Q::one() / &a[r][c];
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (x, p) in row[c..cols].iter_mut().zip(&pivot_row[c..cols]) {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn one_dimensional_kernel() {
        let a = vec![vec![qi(1), qi(-2)], vec![qi(2), qi(-4)]];
        let ns = null_space(a, 2);
        assert_eq!(ns, vec![vec![qi(2), qi(1)]]);
    }

    #[test]
    fn full_rank_has_trivial_kernel() {
        let a = vec![vec![qi(1), q(1, 2)], vec![qi(0), qi(3)]];
        assert!(null_space(a, 2).is_empty());
    }
}
