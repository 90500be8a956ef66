use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::{nullspace, project_off, rank, row_space_basis};
use super::rational::Q;
use super::vector::RationalVector;
use crate::error::{Error, Result};

/// Largest ambient rank handled by the double-description kernel. Rank-4
/// polytopes need rank-5 homogenizations, hence the extra slot.
pub const MAX_RANK: usize = 5;

/// A polyhedral cone in `Q^n` in canonical form.
///
/// Both representations are kept: extremal rays modulo the lineality space
/// (primitive integer vectors orthogonal to it) and irredundant facet normals
/// modulo the orthogonal complement of the span. All lists are sorted, so
/// derived equality is point-set equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cone {
    ambient: usize,
    rays: Vec<RationalVector>,
    lineality: Vec<RationalVector>,
    facets: Vec<RationalVector>,
    equations: Vec<RationalVector>,
}

impl Cone {
    /// The cone of nonnegative combinations of `gens`.
    pub fn new(ambient: usize, gens: &[RationalVector]) -> Result<Cone> {
        check_ambient(ambient)?;
        for g in gens {
            g.check_rank(ambient)?;
        }
        // Facets and equations come from the dual description.
        let (dual_lin, dual_rays) = double_description(ambient, gens);
        let equations = row_space_basis(&dual_lin);
        let mut facets: Vec<RationalVector> = dual_rays
            .iter()
            .map(|f| project_off(f, &equations).primitive())
            .filter(|f| !f.is_zero())
            .collect();
        facets.sort();
        facets.dedup();

        let mut lin_rows = facets.clone();
        lin_rows.extend(equations.iter().cloned());
        let lineality = row_space_basis(&nullspace(&lin_rows, ambient));

        let pointed_dim = ambient - equations.len() - lineality.len();
        let mut rays: Vec<RationalVector> = gens
            .iter()
            .map(|g| project_off(g, &lineality).primitive())
            .filter(|g| !g.is_zero())
            .filter(|g| {
                let tight: Vec<RationalVector> = facets.iter().filter(|f| f.dot(g).is_zero()).cloned().collect();
                // A ray is extremal iff its tight facets cut out a 1-dim face.
                pointed_dim >= 1 && rank(&tight) == pointed_dim - 1
            })
            .collect();
        rays.sort();
        rays.dedup();
        Ok(Cone {
            ambient,
            rays,
            lineality,
            facets,
            equations,
        })
    }

    pub fn from_ints(ambient: usize, gens: &[&[i64]]) -> Result<Cone> {
        let g: Vec<_> = gens.iter().map(|v| RationalVector::from_ints(v)).collect();
        Cone::new(ambient, &g)
    }

    /// `{x : ⟨a, x⟩ ≥ 0 for a in ineqs, ⟨e, x⟩ = 0 for e in eqs}`.
    pub fn from_inequalities(ambient: usize, ineqs: &[RationalVector], eqs: &[RationalVector]) -> Result<Cone> {
        check_ambient(ambient)?;
        let mut cons: Vec<RationalVector> = ineqs.to_vec();
        for e in eqs {
            cons.push(e.clone());
            cons.push(-e);
        }
        for c in &cons {
            c.check_rank(ambient)?;
        }
        let (lin, rays) = double_description(ambient, &cons);
        let mut gens = rays;
        for l in &lin {
            gens.push(l.clone());
            gens.push(-l);
        }
        Cone::new(ambient, &gens)
    }

    /// The whole space `Q^n`.
    pub fn full(ambient: usize) -> Cone {
        Cone::from_inequalities(ambient, &[], &[]).expect("rank checked by caller")
    }

    /// The zero cone `{0}`.
    pub fn zero(ambient: usize) -> Cone {
        Cone::new(ambient, &[]).expect("rank checked by caller")
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Extremal rays (primitive; modulo lineality).
    pub fn rays(&self) -> &[RationalVector] {
        &self.rays
    }

    pub fn lineality(&self) -> &[RationalVector] {
        &self.lineality
    }

    /// Inner facet normals (modulo `equations`).
    pub fn facets(&self) -> &[RationalVector] {
        &self.facets
    }

    /// Basis of the orthogonal complement of the linear span.
    pub fn equations(&self) -> &[RationalVector] {
        &self.equations
    }

    pub fn dim(&self) -> usize {
        self.ambient - self.equations.len()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_full_dim(&self) -> bool {
        self.equations.is_empty()
    }

    /// Rays followed by `±` lineality vectors: a generating set.
    pub fn generators(&self) -> Vec<RationalVector> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(-l);
        }
        g
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        x.rank() == self.ambient
            && self.equations.iter().all(|e| e.dot(x).is_zero())
            && self.facets.iter().all(|f| !f.dot(x).is_negative())
    }

    /// Membership in the relative interior.
    pub fn contains_relint(&self, x: &RationalVector) -> bool {
        x.rank() == self.ambient
            && self.equations.iter().all(|e| e.dot(x).is_zero())
            && self.facets.iter().all(|f| f.dot(x).is_positive())
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.generators().iter().all(|g| self.contains(g))
    }

    /// Indices of facets on which `x` is tight.
    pub fn tight_facets(&self, x: &RationalVector) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&i| self.facets[i].dot(x).is_zero())
            .collect()
    }

    /// The set of facets containing `v` (empty iff `v` is in the relative interior).
    pub fn face_sets(&self, v: &RationalVector) -> Result<BTreeSet<RationalVector>> {
        if !self.contains(v) {
            return Err(Error::Precondition(format!("{v} is not in the cone")));
        }
        Ok(self.facets.iter().filter(|f| f.dot(v).is_zero()).cloned().collect())
    }

    /// `{u : ⟨u, v⟩ ≥ 0 for all v in self}`, recomputed from the generators.
    pub fn dual(&self) -> Cone {
        let mut gens = self.facets.clone();
        for e in &self.equations {
            gens.push(e.clone());
            gens.push(-e);
        }
        Cone::new(self.ambient, &gens).expect("same ambient rank")
    }

    /// Extremal rays on which `x` lies (as a positive multiple).
    pub fn ray_through(&self, x: &RationalVector) -> Option<&RationalVector> {
        self.rays.iter().find(|r| r.same_ray(x))
    }

    /// Whether `x` lies strictly inside the cone and not on any facet.
    pub fn is_interior_point(&self, x: &RationalVector) -> bool {
        self.is_full_dim() && self.contains_relint(x)
    }

    /// Minimal face containing `x` as its list of extremal rays (pointed cones).
    pub fn minimal_face_rays(&self, x: &RationalVector) -> Vec<RationalVector> {
        let tight = self.tight_facets(x);
        self.rays
            .iter()
            .filter(|r| tight.iter().all(|&i| self.facets[i].dot(r).is_zero()))
            .cloned()
            .collect()
    }
}

impl Serialize for Cone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.generators().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let gens = Vec::<RationalVector>::deserialize(d)?;
        let n = gens
            .first()
            .map(|g| g.rank())
            .ok_or_else(|| serde::de::Error::custom("cone needs at least one generator"))?;
        Cone::new(n, &gens).map_err(serde::de::Error::custom)
    }
}

fn check_ambient(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("ambient rank must be positive".into()));
    }
    if n > MAX_RANK {
        return Err(Error::RankTooLarge(n));
    }
    Ok(())
}

/// Double description: generators of `{x : ⟨a, x⟩ ≥ 0 for a in constraints}`
/// as (lineality basis, extremal rays modulo lineality).
///
/// Starts from the whole space and adds one halfspace at a time; new rays are
/// formed only from adjacent pairs, decided by the algebraic rank test.
pub fn double_description(n: usize, constraints: &[RationalVector]) -> (Vec<RationalVector>, Vec<RationalVector>) {
    let mut lin: Vec<RationalVector> = (0..n).map(|i| RationalVector::unit(n, i)).collect();
    let mut rays: Vec<RationalVector> = Vec::new();
    let mut processed: Vec<RationalVector> = Vec::new();

    for a in constraints {
        if a.is_zero() {
            continue;
        }
        if let Some(idx) = lin.iter().position(|l| !a.dot(l).is_zero()) {
            let mut l = lin.remove(idx);
            if a.dot(&l).is_negative() {
                l = -&l;
            }
            let al = a.dot(&l);
            for other in lin.iter_mut() {
                let f = a.dot(other) / &al;
                if !f.is_zero() {
                    *other = other.add_scaled(&-f, &l);
                }
            }
            for r in rays.iter_mut() {
                let f = a.dot(r) / &al;
                if !f.is_zero() {
                    *r = r.add_scaled(&-f, &l).primitive();
                }
            }
            rays.push(l.primitive());
        } else {
            let vals: Vec<Q> = rays.iter().map(|r| a.dot(r)).collect();
            let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
            let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
            if neg.is_empty() {
                processed.push(a.clone());
                continue;
            }
            let target = n - lin.len();
            let mut next: Vec<RationalVector> = (0..rays.len())
                .filter(|&i| !vals[i].is_negative())
                .map(|i| rays[i].clone())
                .collect();
            let tight_sets: Vec<Vec<bool>> = rays
                .iter()
                .map(|r| processed.iter().map(|c| c.dot(r).is_zero()).collect())
                .collect();
            for &p in &pos {
                for &q in &neg {
                    let common: Vec<RationalVector> = processed
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| tight_sets[p][*k] && tight_sets[q][*k])
                        .map(|(_, c)| c.clone())
                        .collect();
                    if target < 2 || common.len() < target - 2 {
                        continue;
                    }
                    if rank(&common) == target - 2 {
                        let v = rays[q].scale(&vals[p]).add_scaled(&-vals[q].clone(), &rays[p]);
                        next.push(v.primitive());
                    }
                }
            }
            rays = next;
        }
        processed.push(a.clone());
        rays.sort();
        rays.dedup();
    }
    (lin, rays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rv;

    #[test]
    fn orthant_self_dual() {
        let c = Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert_eq!(c.dual(), c);
        assert!(c.is_pointed() && c.is_full_dim());
    }

    #[test]
    fn example_cone_dual() {
        let c = Cone::from_ints(3, &[&[0, 0, 1], &[0, 2, 1], &[1, 0, 0]]).unwrap();
        let expected = Cone::from_ints(3, &[&[1, 0, 0], &[0, 1, 0], &[0, -1, 2]]).unwrap();
        assert_eq!(c.dual(), expected);
        assert_eq!(c.rays(), &[rv![0, 0, 1], rv![0, 2, 1], rv![1, 0, 0]]);
        assert_eq!(c.dual().dual(), c);
    }

    #[test]
    fn tail_cone_dual() {
        let c = Cone::from_ints(2, &[&[1, 0], &[1, 4]]).unwrap();
        let expected = Cone::from_ints(2, &[&[0, 1], &[4, -1]]).unwrap();
        assert_eq!(c.dual(), expected);
    }

    #[test]
    fn redundant_generators_removed() {
        let c = Cone::from_ints(2, &[&[1, 0], &[1, 1], &[1, 4], &[2, 0]]).unwrap();
        assert_eq!(c.rays(), &[rv![1, 0], rv![1, 4]]);
    }

    #[test]
    fn zero_cone_dual_is_space() {
        let z = Cone::zero(3);
        let d = z.dual();
        assert_eq!(d, Cone::full(3));
        assert_eq!(d.lineality().len(), 3);
        assert_eq!(d.dual(), z);
    }

    #[test]
    fn cone_over_square_has_four_facets() {
        let c = Cone::from_ints(3, &[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]]).unwrap();
        assert_eq!(c.rays().len(), 4);
        assert_eq!(c.facets().len(), 4);
    }

    #[test]
    fn half_plane_with_lineality() {
        let c = Cone::from_ints(2, &[&[1, 0], &[-1, 0], &[0, 1]]).unwrap();
        assert_eq!(c.lineality().len(), 1);
        assert_eq!(c.rays(), &[rv![0, 1]]);
        assert_eq!(c.facets(), &[rv![0, 1]]);
        assert_eq!(c.dual(), Cone::from_ints(2, &[&[0, 1]]).unwrap());
    }

    #[test]
    fn lower_dimensional_cone() {
        let c = Cone::from_ints(3, &[&[1, 0, 0], &[1, 1, 0]]).unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.equations(), &[rv![0, 0, 1]]);
        assert!(c.contains(&rv![2, 1, 0]));
        assert!(!c.contains(&rv![2, 1, 1]));
        assert_eq!(c.dual().dual(), c);
    }

    #[test]
    fn face_sets_of_orthant() {
        let c = Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let f = c.face_sets(&rv![1, 0]).unwrap();
        assert_eq!(f.into_iter().collect::<Vec<_>>(), vec![rv![0, 1]]);
        assert!(c.face_sets(&rv![1, 1]).unwrap().is_empty());
        assert!(c.face_sets(&rv![-1, 1]).is_err());
    }
}
