//! Dense exact linear algebra over `Q`. Matrices are slices of row vectors.

use num_traits::{One, Zero};

use super::rational::Q;
use super::vector::RationalVector;

/// Reduced row echelon form together with pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rows: Vec<Vec<Q>>,
    pub pivots: Vec<usize>,
}

/// Gauss–Jordan elimination restricted to the first `ncols` columns; any extra
/// columns are carried along (augmented part).
pub fn rref_partial(mut m: Vec<Vec<Q>>, ncols: usize) -> Rref {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { rows: m, pivots }
}

pub fn rref(rows: &[RationalVector]) -> Rref {
    let n = rows.first().map_or(0, |r| r.rank());
    rref_partial(rows.iter().map(|r| r.coords().to_vec()).collect(), n)
}

pub fn rank(rows: &[RationalVector]) -> usize {
    rref(rows).pivots.len()
}

/// Canonical basis of the row space (nonzero rows of the RREF).
pub fn row_space_basis(rows: &[RationalVector]) -> Vec<RationalVector> {
    let r = rref(rows);
    r.rows
        .into_iter()
        .take(r.pivots.len())
        .map(RationalVector::new)
        .collect()
}

/// Basis of `{x : row · x = 0 for all rows}` in `Q^ncols`.
pub fn nullspace(rows: &[RationalVector], ncols: usize) -> Vec<RationalVector> {
    let r = rref_partial(rows.iter().map(|r| r.coords().to_vec()).collect(), ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !r.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Q::zero(); ncols];
            x[f] = Q::one();
            for (i, &p) in r.pivots.iter().enumerate() {
                x[p] = -r.rows[i][f].clone();
            }
            RationalVector::new(x)
        })
        .collect()
}

/// Determinant of a square matrix.
pub fn det(m: &[RationalVector]) -> Q {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.iter().map(|r| r.coords().to_vec()).collect();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let pivot_row = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &pivot_row[c];
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                    *x -= &f * p;
                }
            }
        }
    }
    d
}

pub fn transpose(m: &[RationalVector]) -> Vec<RationalVector> {
    let n = m.first().map_or(0, |r| r.rank());
    (0..n)
        .map(|j| RationalVector::new(m.iter().map(|r| r[j].clone()).collect()))
        .collect()
}

/// Row-major inverse, if the matrix is invertible.
pub fn inverse(m: &[RationalVector]) -> Option<Vec<RationalVector>> {
    let n = m.len();
    let aug: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.coords().to_vec();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let r = rref_partial(aug, n);
    if r.pivots.len() < n {
        return None;
    }
    Some(
        r.rows
            .into_iter()
            .map(|row| RationalVector::new(row[n..].to_vec()))
            .collect(),
    )
}

/// `M v` for a row-major matrix.
pub fn mat_vec(m: &[RationalVector], v: &RationalVector) -> RationalVector {
    RationalVector::new(m.iter().map(|r| r.dot(v)).collect())
}

/// Outcome of an exact linear solve `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Unique(RationalVector),
    /// The listed original rows combine to `0 = nonzero`.
    Inconsistent {
        rows: Vec<usize>,
    },
    /// Consistent, with the given free unknowns.
    Underdetermined {
        particular: RationalVector,
        free: Vec<usize>,
    },
}

/// Solves `A x = b` exactly, tracking which equations witness inconsistency.
pub fn solve(a: &[RationalVector], b: &[Q], ncols: usize) -> LinearSolution {
    let m = a.len();
    let aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, bi))| {
            let mut r = row.coords().to_vec();
            r.push(bi.clone());
            r.extend((0..m).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let r = rref_partial(aug, ncols);
    for row in r.rows.iter().skip(r.pivots.len()) {
        if !row[ncols].is_zero() {
            let rows = (0..m).filter(|&j| !row[ncols + 1 + j].is_zero()).collect();
            return LinearSolution::Inconsistent { rows };
        }
    }
    let mut x = vec![Q::zero(); ncols];
    for (i, &p) in r.pivots.iter().enumerate() {
        x[p] = r.rows[i][ncols].clone();
    }
    let x = RationalVector::new(x);
    if r.pivots.len() == ncols {
        LinearSolution::Unique(x)
    } else {
        let free = (0..ncols).filter(|c| !r.pivots.contains(c)).collect();
        LinearSolution::Underdetermined { particular: x, free }
    }
}

/// Orthogonal projection of `v` onto the complement of `span(basis)`.
pub fn project_off(v: &RationalVector, basis: &[RationalVector]) -> RationalVector {
    if basis.is_empty() {
        return v.clone();
    }
    // Solve the Gram system G c = B v and subtract B^T c.
    let k = basis.len();
    let gram: Vec<RationalVector> = basis
        .iter()
        .map(|bi| RationalVector::new(basis.iter().map(|bj| bi.dot(bj)).collect()))
        .collect();
    let rhs: Vec<Q> = basis.iter().map(|bi| bi.dot(v)).collect();
    let c = match solve(&gram, &rhs, k) {
        LinearSolution::Unique(c) => c,
        LinearSolution::Underdetermined { particular, .. } => particular,
        LinearSolution::Inconsistent { .. } => unreachable!("Gram systems are consistent"),
    };
    basis
        .iter()
        .zip(c.iter())
        .fold(v.clone(), |acc, (bi, ci)| acc.add_scaled(&-ci.clone(), bi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::{q, qr};
    use crate::rv;

    #[test]
    fn determinant_and_inverse() {
        let m = vec![rv![2, 1], rv![1, 3]];
        assert_eq!(det(&m), q(5));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0], RationalVector::new(vec![qr(3, 5), qr(-1, 5)]));
        assert!(inverse(&[rv![1, 2], rv![2, 4]]).is_none());
    }

    #[test]
    fn nullspace_is_orthogonal() {
        let rows = vec![rv![1, 2, 3]];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(rows[0].dot(&v).is_zero());
        }
    }

    #[test]
    fn solve_reports_inconsistent_rows() {
        let a = vec![rv![1, 0], rv![0, 1], rv![1, 1]];
        let b = vec![q(1), q(1), q(3)];
        assert_eq!(solve(&a, &b, 2), LinearSolution::Inconsistent { rows: vec![0, 1, 2] });
        let b = vec![q(1), q(1), q(2)];
        assert_eq!(solve(&a, &b, 2), LinearSolution::Unique(rv![1, 1]));
    }

    #[test]
    fn projection_kills_span() {
        let p = project_off(&rv![1, 1, 0], &[rv![1, 0, 0]]);
        assert_eq!(p, rv![0, 1, 0]);
    }
}
