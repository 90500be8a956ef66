use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::linalg::{det, inverse, mat_vec, transpose};
use super::rational::Q;
use super::vector::RationalVector;
use crate::error::{Error, Result};

/// A full-rank lattice in `Q^n`, given by basis vectors expressed in the
/// ambient standard coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    basis: Vec<RationalVector>,
    // Row i of `coord_map` gives the i-th coordinate functional, i.e. the rows
    // of B^{-1} when B has the basis vectors as columns.
    coord_map: Vec<RationalVector>,
    covolume: Q,
}

impl Lattice {
    pub fn standard(rank: usize) -> Self {
        let basis: Vec<_> = (0..rank).map(|i| RationalVector::unit(rank, i)).collect();
        Lattice {
            coord_map: basis.clone(),
            basis,
            covolume: Q::one(),
        }
    }

    /// Lattice spanned by the given basis vectors; they must be linearly
    /// independent and span `Q^n`.
    pub fn from_basis(basis: Vec<RationalVector>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::Invalid("lattice basis must be nonempty".into()));
        }
        for b in &basis {
            b.check_rank(n)?;
        }
        // Columns are the basis vectors: B = transpose(rows).
        let b_cols = transpose(&basis);
        let inv = inverse(&b_cols).ok_or_else(|| Error::Invalid("lattice basis is not invertible".into()))?;
        let covolume = det(&basis).abs();
        Ok(Lattice {
            basis,
            coord_map: inv,
            covolume,
        })
    }

    /// The lattice generated by `Z^n` together with extra rational vectors
    /// (e.g. `Z^2 + Z(1/2,1/2)`), via Hermite reduction of the generators.
    pub fn generated_by(rank: usize, extra: &[RationalVector]) -> Result<Self> {
        let mut gens: Vec<RationalVector> = (0..rank).map(|i| RationalVector::unit(rank, i)).collect();
        for e in extra {
            e.check_rank(rank)?;
            gens.push(e.clone());
        }
        Self::from_basis(hermite_basis(&gens, rank))
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RationalVector] {
        &self.basis
    }

    /// Absolute determinant of the basis (index of `Z^n` in the lattice is its
    /// inverse when the lattice contains `Z^n`).
    pub fn covolume(&self) -> &Q {
        &self.covolume
    }

    pub fn is_standard(&self) -> bool {
        self.covolume.is_one()
            && self.basis.iter().all(|b| b.is_integral())
            && self.coord_map.iter().all(|r| r.is_integral())
    }

    /// Coordinates of `v` in the lattice basis.
    pub fn coordinates(&self, v: &RationalVector) -> RationalVector {
        mat_vec(&self.coord_map, v)
    }

    pub fn from_coordinates(&self, c: &RationalVector) -> RationalVector {
        self.basis
            .iter()
            .zip(c.iter())
            .fold(RationalVector::zeros(self.rank()), |acc, (b, ci)| acc.add_scaled(ci, b))
    }

    pub fn contains(&self, v: &RationalVector) -> bool {
        self.coordinates(v).is_integral()
    }

    /// `μ(v) = min{k > 0 : k v ∈ L}` and the lattice point `μ(v) v`.
    pub fn multiplicity(&self, v: &RationalVector) -> (RationalVector, BigInt) {
        let mu = self.coordinates(v).denominator_lcm();
        (v.scale(&Q::from_integer(mu.clone())), mu)
    }

    /// Primitive lattice generator of the ray through `v` (`v ≠ 0`).
    pub fn primitive_generator(&self, v: &RationalVector) -> RationalVector {
        self.from_coordinates(&self.coordinates(v).primitive())
    }

    /// The dual lattice `{u : ⟨u, v⟩ ∈ Z for all v ∈ L}`.
    pub fn dual(&self) -> Lattice {
        // Basis vectors of the dual are the coordinate functionals.
        Lattice::from_basis(self.coord_map.clone()).expect("dual basis is invertible")
    }

    /// Change of basis by a unimodular integer matrix (rows act on the basis).
    pub fn rebased(&self, unimodular: &[RationalVector]) -> Result<Lattice> {
        let d = det(unimodular);
        if d.abs() != Q::one() || !unimodular.iter().all(|r| r.is_integral()) {
            return Err(Error::Invalid("change of basis is not unimodular".into()));
        }
        let basis = unimodular
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.basis)
                    .fold(RationalVector::zeros(self.rank()), |acc, (c, b)| acc.add_scaled(c, b))
            })
            .collect();
        Lattice::from_basis(basis)
    }

    /// Sublattice / superlattice check: every basis vector of `other` lies in `self`.
    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }
}

/// Serialized as its list of basis vectors.
impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.basis.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let basis = Vec::<RationalVector>::deserialize(d)?;
        Lattice::from_basis(basis).map_err(serde::de::Error::custom)
    }
}

/// A basis of the Z-module generated by `gens` (which must span `Q^rank`),
/// computed by integer row reduction after clearing denominators.
fn hermite_basis(gens: &[RationalVector], rank: usize) -> Vec<RationalVector> {
    use num_integer::Integer;
    use num_traits::Zero;

    let den = gens.iter().fold(BigInt::one(), |acc, g| acc.lcm(&g.denominator_lcm()));
    let dq = Q::from_integer(den.clone());
    let mut rows: Vec<Vec<BigInt>> = gens
        .iter()
        .map(|g| g.iter().map(|x| (x * &dq).to_integer()).collect())
        .collect();
    let mut basis = Vec::new();
    for c in 0..rank {
        // Euclid on column c among remaining rows.
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            let prow = rows[p].clone();
            for &i in &nz {
                if i != p {
                    let f = rows[i][c].div_floor(&prow[c]);
                    for (x, y) in rows[i].iter_mut().zip(&prow) {
                        *x -= &f * y;
                    }
                }
            }
        }
        if let Some(p) = (0..rows.len()).find(|&i| !rows[i][c].is_zero()) {
            let row = rows.remove(p);
            basis.push(RationalVector::new(
                row.into_iter().map(|x| Q::new(x, den.clone())).collect(),
            ));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::{q, qr};
    use crate::rv;

    #[test]
    fn multiplicities() {
        let l = Lattice::standard(2);
        let (p, mu) = l.multiplicity(&RationalVector::new(vec![qr(1, 2), q(0)]));
        assert_eq!((p, mu), (rv![1, 0], BigInt::from(2)));
        let (p, mu) = l.multiplicity(&RationalVector::new(vec![qr(-2, 5), q(0)]));
        assert_eq!((p, mu), (rv![-2, 0], BigInt::from(5)));
        let (p, mu) = l.multiplicity(&rv![3, 6]);
        assert_eq!((p, mu), (rv![3, 6], BigInt::from(1)));
        assert_eq!(l.primitive_generator(&rv![3, 6]), rv![1, 2]);
    }

    #[test]
    fn quotient_lattice() {
        let half = RationalVector::new(vec![qr(1, 2), qr(1, 2)]);
        let l = Lattice::generated_by(2, std::slice::from_ref(&half)).unwrap();
        assert_eq!(l.covolume(), &qr(1, 2));
        assert!(l.contains(&half));
        assert!(!l.contains(&RationalVector::new(vec![qr(1, 2), q(0)])));
        let d = l.dual();
        assert_eq!(d.covolume(), &q(2));
        assert!(d.contains(&rv![1, 1]));
        assert!(!d.contains(&rv![1, 0]));
        assert_eq!(l.primitive_generator(&rv![1, 1]), half);
    }
}
