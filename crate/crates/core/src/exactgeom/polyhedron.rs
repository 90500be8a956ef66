use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::cone::Cone;
use super::rational::Q;
use super::vector::RationalVector;
use crate::error::{Error, Result};

/// A facet of a polyhedron: `⟨normal, x⟩ ≥ offset`, with the vertices and tail
/// rays it contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: RationalVector,
    pub offset: Q,
    pub vertices: Vec<usize>,
    pub tail_rays: Vec<usize>,
}

/// `conv(vertices) + tail` with a pointed tail cone, stored canonically in
/// V-representation (sorted, irredundant vertices). Facet data is derived at
/// construction from the homogenization.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    vertices: Vec<RationalVector>,
    tail: Cone,
    facets: Vec<Facet>,
    equations: Vec<(RationalVector, Q)>,
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.tail == other.tail
    }
}
impl Eq for Polyhedron {}

impl Polyhedron {
    pub fn new(points: &[RationalVector], tail: Cone) -> Result<Polyhedron> {
        let n = tail.ambient();
        if points.is_empty() {
            return Err(Error::Invalid("polyhedron needs at least one point".into()));
        }
        if !tail.is_pointed() {
            return Err(Error::Invalid("tail cone of a polyhedron must be pointed".into()));
        }
        for p in points {
            p.check_rank(n)?;
        }
        let mut gens: Vec<RationalVector> = points.iter().map(|p| p.extend(Q::one())).collect();
        gens.extend(tail.rays().iter().map(|r| r.extend(Q::zero())));
        let hom = Cone::new(n + 1, &gens)?;

        let mut vertices: Vec<RationalVector> = hom
            .rays()
            .iter()
            .filter(|r| r[n].is_positive())
            .map(|r| r.truncate_last().scale(&(Q::one() / &r[n])))
            .collect();
        vertices.sort();
        vertices.dedup();

        let mut facets = Vec::new();
        for f in hom.facets() {
            let normal = f.truncate_last();
            let offset = -f[n].clone();
            let vs: Vec<usize> = (0..vertices.len())
                .filter(|&i| normal.dot(&vertices[i]) == offset)
                .collect();
            if vs.is_empty() {
                // The face at infinity (t = 0) is not a facet of the polyhedron.
                continue;
            }
            let rs: Vec<usize> = (0..tail.rays().len())
                .filter(|&i| normal.dot(&tail.rays()[i]).is_zero())
                .collect();
            facets.push(Facet {
                normal,
                offset,
                vertices: vs,
                tail_rays: rs,
            });
        }
        let equations = hom
            .equations()
            .iter()
            .map(|e| (e.truncate_last(), -e[n].clone()))
            .collect();
        Ok(Polyhedron {
            vertices,
            tail,
            facets,
            equations,
        })
    }

    /// The polytope `conv(points)`.
    pub fn polytope(points: &[RationalVector]) -> Result<Polyhedron> {
        let n = points
            .first()
            .map(|p| p.rank())
            .ok_or_else(|| Error::Invalid("polytope needs at least one point".into()))?;
        Polyhedron::new(points, Cone::zero(n))
    }

    /// `v + tail`.
    pub fn translated_cone(v: &RationalVector, tail: Cone) -> Result<Polyhedron> {
        Polyhedron::new(std::slice::from_ref(v), tail)
    }

    pub fn rank(&self) -> usize {
        self.tail.ambient()
    }

    pub fn vertices(&self) -> &[RationalVector] {
        &self.vertices
    }

    pub fn tail(&self) -> &Cone {
        &self.tail
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Affine equations `⟨a, x⟩ = b` of the affine hull.
    pub fn equations(&self) -> &[(RationalVector, Q)] {
        &self.equations
    }

    pub fn dim(&self) -> usize {
        self.rank() - self.equations.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.tail.rays().is_empty()
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        x.rank() == self.rank()
            && self.equations.iter().all(|(a, b)| &a.dot(x) == b)
            && self.facets.iter().all(|f| f.normal.dot(x) >= f.offset)
    }

    pub fn contains_relint(&self, x: &RationalVector) -> bool {
        x.rank() == self.rank()
            && self.equations.iter().all(|(a, b)| &a.dot(x) == b)
            && self.facets.iter().all(|f| f.normal.dot(x) > f.offset)
    }

    /// `min ⟨u, x⟩` over the polyhedron; errors if unbounded below.
    pub fn min_value(&self, u: &RationalVector) -> Result<Q> {
        Ok(self.min_face(u)?.0)
    }

    /// Minimum of `⟨u, ·⟩` and the vertices attaining it.
    pub fn min_face(&self, u: &RationalVector) -> Result<(Q, Vec<RationalVector>)> {
        u.check_rank(self.rank())?;
        if self.tail.rays().iter().any(|r| u.dot(r).is_negative()) {
            return Err(Error::Unbounded(format!(
                "{u} is not in the dual of the tail cone; minimum is -infinity"
            )));
        }
        let m = self
            .vertices
            .iter()
            .map(|v| u.dot(v))
            .min()
            .expect("nonempty vertex set");
        let face = self.vertices.iter().filter(|v| u.dot(v) == m).cloned().collect();
        Ok((m, face))
    }

    /// Minkowski sum; tails must agree as point sets.
    pub fn minkowski_sum(&self, other: &Polyhedron) -> Result<Polyhedron> {
        if self.tail != other.tail {
            return Err(Error::Invalid("Minkowski sum of polyhedra with different tails".into()));
        }
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a + b);
            }
        }
        Polyhedron::new(&pts, self.tail.clone())
    }

    pub fn translate(&self, v: &RationalVector) -> Result<Polyhedron> {
        let pts: Vec<_> = self.vertices.iter().map(|p| p + v).collect();
        Polyhedron::new(&pts, self.tail.clone())
    }

    /// Facets of the tail whose minimizing face of `self` contains `v`.
    pub fn face_sets(&self, v: &RationalVector) -> Result<BTreeSet<RationalVector>> {
        if !self.contains(v) {
            return Err(Error::Precondition(format!("{v} is not in the polyhedron")));
        }
        let mut out = BTreeSet::new();
        for f in self.tail.facets() {
            if f.dot(v) == self.min_value(f)? {
                out.insert(f.clone());
            }
        }
        Ok(out)
    }

    /// The vertex equal to `v`, if any.
    pub fn vertex_index(&self, v: &RationalVector) -> Option<usize> {
        self.vertices.binary_search(v).ok()
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conv{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")?;
        if !self.is_bounded() {
            write!(f, " + cone{{")?;
            for (i, r) in self.tail.rays().iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{r}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyhedronRepr {
    vertices: Vec<RationalVector>,
    tail: Vec<RationalVector>,
}

impl Serialize for Polyhedron {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyhedronRepr {
            vertices: self.vertices.clone(),
            tail: self.tail.generators(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polyhedron {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PolyhedronRepr::deserialize(d)?;
        let n = r
            .vertices
            .first()
            .map(|v| v.rank())
            .ok_or_else(|| serde::de::Error::custom("polyhedron needs a vertex"))?;
        let tail = Cone::new(n, &r.tail).map_err(serde::de::Error::custom)?;
        Polyhedron::new(&r.vertices, tail).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::{q, qr};
    use crate::rv;

    fn sigma() -> Cone {
        Cone::from_ints(2, &[&[1, 0], &[1, 4]]).unwrap()
    }

    #[test]
    fn segment_plus_segment() {
        let s = Polyhedron::new(&[rv![0, 0], rv![0, 1]], sigma()).unwrap();
        let sum = s.minkowski_sum(&s).unwrap();
        assert_eq!(sum, Polyhedron::new(&[rv![0, 0], rv![0, 2]], sigma()).unwrap());
    }

    #[test]
    fn single_vertex_sum() {
        let a = Polyhedron::translated_cone(&RationalVector::new(vec![qr(1, 2), q(0)]), sigma()).unwrap();
        let b = Polyhedron::translated_cone(&RationalVector::new(vec![qr(-2, 5), q(0)]), sigma()).unwrap();
        let s = a.minkowski_sum(&b).unwrap();
        assert_eq!(s.vertices(), &[RationalVector::new(vec![qr(1, 10), q(0)])]);
    }

    #[test]
    fn neutral_tail() {
        let p = Polyhedron::new(&[rv![0, 0], rv![0, 1], rv![3, 1]], sigma()).unwrap();
        let t = Polyhedron::translated_cone(&rv![0, 0], sigma()).unwrap();
        assert_eq!(p.minkowski_sum(&t).unwrap(), p);
        // (3,1) = (0,1) + 3(1,0) is redundant.
        assert_eq!(p.vertices(), &[rv![0, 0], rv![0, 1]]);
    }

    #[test]
    fn facets_of_unbounded_polyhedron() {
        let p = Polyhedron::new(&[rv![0, 0], rv![0, 2]], sigma()).unwrap();
        assert_eq!(p.facets().len(), 3);
        assert!(p.contains(&rv![1, 1]));
        assert!(!p.contains(&rv![0, 3]));
        assert!(p.contains_relint(&rv![1, 1]));
        assert!(!p.contains_relint(&rv![0, 1]));
    }

    #[test]
    fn unbounded_minimum_rejected() {
        let p = Polyhedron::translated_cone(&rv![0, 0], sigma()).unwrap();
        assert!(p.min_value(&rv![-1, 0]).is_err());
        assert_eq!(p.min_value(&rv![4, -1]).unwrap(), q(0));
    }

    #[test]
    fn polyhedron_face_sets() {
        let p = Polyhedron::new(&[rv![0, 0], rv![0, 2]], sigma()).unwrap();
        // (0,0) lies on the face minimizing the normal (0,1) of the ray (1,0).
        let f = p.face_sets(&rv![0, 0]).unwrap();
        assert_eq!(f.into_iter().collect::<Vec<_>>(), vec![rv![0, 1]]);
        assert!(p.face_sets(&rv![1, 1]).unwrap().is_empty());
    }
}
