//! Proper polyhedral divisors on P¹ with complete locus, torus-invariant
//! boundaries, quotient pairs and the klt/plt criteria.

mod families;
mod json;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::disc::DivisorSpec;
use crate::error::{Error, Result};
use crate::exactgeom::rational::qserde;
use crate::exactgeom::{Cone, Lattice, Polyhedron, RationalVector, Q};

pub use families::{VertexFamilies, VertexFamily};
pub use json::{parse_pdiv_json, pdiv_to_json, PDivisorInput};

/// Opaque point label on P¹. Canonical order is lexicographic.
pub type Label = String;

/// A polyhedral divisor `Σ D_y · y` on P¹ over `N = Z^rank`.
///
/// Labels without a stored coefficient carry the tail cone itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PDivisor {
    rank: usize,
    tail: Cone,
    coefficients: BTreeMap<Label, Polyhedron>,
    degree: Polyhedron,
}

impl PDivisor {
    pub fn new(tail: Cone, coefficients: BTreeMap<Label, Polyhedron>) -> Result<PDivisor> {
        let rank = tail.ambient();
        if !tail.is_pointed() || !tail.is_full_dim() {
            return Err(Error::Invalid("tail cone must be pointed and full-dimensional".into()));
        }
        for (y, p) in &coefficients {
            if p.tail() != &tail {
                return Err(Error::Invalid(format!(
                    "coefficient at {y:?} has tail cone different from the tail"
                )));
            }
        }
        let mut degree = Polyhedron::translated_cone(&RationalVector::zeros(rank), tail.clone())?;
        for p in coefficients.values() {
            degree = degree.minkowski_sum(p)?;
        }
        Ok(PDivisor {
            rank,
            tail,
            coefficients,
            degree,
        })
    }

    /// Builds coefficients `conv(vertices) + tail` from vertex lists.
    pub fn from_vertices(tail: Cone, coefficients: &[(&str, Vec<RationalVector>)]) -> Result<PDivisor> {
        let mut map = BTreeMap::new();
        for (y, vs) in coefficients {
            if map.contains_key(*y) {
                return Err(Error::Invalid(format!("duplicate label {y:?}")));
            }
            map.insert(y.to_string(), Polyhedron::new(vs, tail.clone())?);
        }
        PDivisor::new(tail, map)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tail(&self) -> &Cone {
        &self.tail
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::standard(self.rank)
    }

    pub fn coefficients(&self) -> &BTreeMap<Label, Polyhedron> {
        &self.coefficients
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.coefficients.keys()
    }

    /// The coefficient at `y`, or the tail itself for absent labels.
    pub fn coefficient(&self, y: &str) -> Polyhedron {
        self.coefficients
            .get(y)
            .cloned()
            .unwrap_or_else(|| self.zero_coefficient())
    }

    fn zero_coefficient(&self) -> Polyhedron {
        Polyhedron::translated_cone(&RationalVector::zeros(self.rank), self.tail.clone()).expect("tail is pointed")
    }

    /// `deg D = Σ_y D_y`.
    pub fn degree(&self) -> &Polyhedron {
        &self.degree
    }

    /// `Σ_{y ≠ z} D_y`.
    pub fn degree_without(&self, z: &str) -> Polyhedron {
        self.coefficients
            .iter()
            .filter(|(y, _)| y.as_str() != z)
            .fold(self.zero_coefficient(), |acc, (_, p)| {
                acc.minkowski_sum(p).expect("common tail")
            })
    }

    /// `D(u) = Σ_y min_{v ∈ D_y} ⟨u, v⟩ · y` for `u` in the dual of the tail.
    pub fn evaluate(&self, u: &RationalVector) -> Result<BTreeMap<Label, Q>> {
        u.check_rank(self.rank)?;
        if !self.tail.dual().contains(u) {
            return Err(Error::Precondition(format!("{u} is not in the dual of the tail cone")));
        }
        self.coefficients
            .iter()
            .map(|(y, p)| Ok((y.clone(), p.min_value(u)?)))
            .collect()
    }

    /// Properness: `deg D ⊊ tail`. The witness is a point of `tail \ deg`.
    pub fn is_proper(&self) -> ProperCertificate {
        let origin = RationalVector::zeros(self.rank);
        if let Some(v) = self.degree.vertices().iter().find(|v| !self.tail.contains(v)) {
            return ProperCertificate {
                proper: false,
                witness: None,
                reason: format!("degree vertex {v} lies outside the tail cone"),
            };
        }
        if self.degree.contains(&origin) {
            return ProperCertificate {
                proper: false,
                witness: None,
                reason: "degree contains the origin, hence equals the tail cone".into(),
            };
        }
        ProperCertificate {
            proper: true,
            witness: Some(origin),
            reason: "origin ∈ tail \\ deg".into(),
        }
    }

    /// Properness decided through evaluation: `deg D(u) ≥ 0` on generators of
    /// the dual tail and `> 0` at an interior sample of it.
    pub fn is_proper_by_evaluation(&self) -> bool {
        let dual = self.tail.dual();
        let deg_of = |u: &RationalVector| -> Option<Q> { self.degree.min_value(u).ok() };
        let gens_ok = dual.rays().iter().all(|u| deg_of(u).is_some_and(|v| !v.is_negative()));
        let interior = dual
            .rays()
            .iter()
            .fold(RationalVector::zeros(self.rank), |acc, r| &acc + r);
        gens_ok && deg_of(&interior).is_some_and(|v| v.is_positive())
    }

    /// Whether the ray through `n` meets the degree polyhedron.
    pub fn ray_meets_degree(&self, n: &RationalVector) -> bool {
        self.degree.vertices().iter().any(|v| v.is_zero() || v.same_ray(n))
    }

    /// Extremal tail rays disjoint from the degree (these give prime divisors).
    pub fn free_rays(&self) -> Vec<RationalVector> {
        self.tail
            .rays()
            .iter()
            .filter(|r| !self.ray_meets_degree(r))
            .cloned()
            .collect()
    }

    /// `μ_D(y)`: maximal vertex multiplicity of `D_y`.
    pub fn multiplicity_over(&self, y: &str) -> BigInt {
        match self.coefficients.get(y) {
            None => BigInt::one(),
            Some(p) => p
                .vertices()
                .iter()
                .map(vertex_multiplicity)
                .max()
                .unwrap_or_else(BigInt::one),
        }
    }

    pub fn type_triple(&self) -> TypeTriple {
        let ms: Vec<u64> = self
            .coefficients
            .keys()
            .map(|y| self.multiplicity_over(y).to_u64().unwrap_or(u64::MAX))
            .filter(|&m| m > 1)
            .collect();
        TypeTriple::from_multiplicities(ms)
    }

    pub fn quotient_pair(&self, delta: &Boundary) -> QuotientPair {
        let mut b = BTreeMap::new();
        for (y, p) in &self.coefficients {
            let by = p
                .vertices()
                .iter()
                .map(|v| vertex_b(v, &delta.vertical_coefficient(y, v)))
                .max()
                .unwrap_or_else(Q::zero);
            b.insert(y.clone(), by);
        }
        let degree = b.values().fold(Q::zero(), |acc, x| acc + x);
        QuotientPair { b, degree }
    }

    /// klt ⟺ the quotient pair is a klt log Fano pair: all `b_y < 1`, `Σ b_y < 2`.
    pub fn is_klt(&self, delta: &Boundary) -> bool {
        let qp = self.quotient_pair(delta);
        qp.b.values().all(|b| b < &Q::one()) && qp.degree < Q::from_integer(2.into())
    }

    /// plt test for `(X, Δ + E)` where `E` is the prime divisor `extra`.
    pub fn is_plt_with(&self, delta: &Boundary, extra: &DivisorSpec) -> Result<bool> {
        match extra {
            DivisorSpec::Horizontal(n) => {
                let ray = self
                    .tail
                    .ray_through(n)
                    .ok_or_else(|| Error::Precondition(format!("{n} is not an extremal tail ray")))?;
                if self.ray_meets_degree(ray) {
                    return Err(Error::Precondition(format!(
                        "ray {ray} meets the degree; it is not a divisor on X"
                    )));
                }
                if !delta.ray_coefficient(ray).is_zero() {
                    return Err(Error::Precondition(format!(
                        "ray {ray} is in the support of the boundary"
                    )));
                }
                Ok(self.is_klt(delta))
            }
            DivisorSpec::Vertical { point, w } => {
                let p = self.coefficient(point);
                if p.vertex_index(w).is_none() {
                    return Err(Error::Precondition(format!(
                        "{w} is not a vertex of the coefficient at {point:?}"
                    )));
                }
                if !delta.vertical_coefficient(point, w).is_zero() {
                    return Err(Error::Precondition(format!(
                        "D_({point},{w}) is in the support of the boundary"
                    )));
                }
                let qp = self.quotient_pair(delta);
                let rest =
                    qp.b.iter()
                        .filter(|(y, _)| y.as_str() != point)
                        .fold(Q::zero(), |acc, (_, b)| acc + b);
                Ok(self.is_klt(delta) && rest < Q::one())
            }
        }
    }

    /// True iff the type is one of the platonic triples.
    pub fn platonic_filter(&self) -> bool {
        self.type_triple().is_platonic()
    }

    /// All vertex families, optionally only those summing onto `target`'s ray.
    pub fn vertex_families(&self, target: Option<&RationalVector>) -> VertexFamilies<'_> {
        VertexFamilies::new(self, target.cloned())
    }
}

/// `μ(v)` for the standard lattice.
pub fn vertex_multiplicity(v: &RationalVector) -> BigInt {
    v.denominator_lcm()
}

/// `(μ(v) − 1 + c)/μ(v)`.
pub fn vertex_b(v: &RationalVector, c: &Q) -> Q {
    let mu = Q::from_integer(vertex_multiplicity(v));
    (&mu - Q::one() + c) / mu
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProperCertificate {
    pub proper: bool,
    pub witness: Option<RationalVector>,
    pub reason: String,
}

/// Sorted multiplicities of the multiple points, padded with 1s to length 3.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeTriple {
    Typed([u64; 3]),
    /// More than three multiple points; the full sorted multiset.
    Untyped(Vec<u64>),
}

impl TypeTriple {
    pub fn from_multiplicities(mut ms: Vec<u64>) -> TypeTriple {
        ms.retain(|&m| m > 1);
        ms.sort_unstable();
        if ms.len() > 3 {
            return TypeTriple::Untyped(ms);
        }
        let mut t = [1u64; 3];
        let off = 3 - ms.len();
        t[off..].copy_from_slice(&ms);
        TypeTriple::Typed(t)
    }

    pub fn is_platonic(&self) -> bool {
        match self {
            TypeTriple::Untyped(_) => false,
            TypeTriple::Typed([p, q, r]) => {
                *p == 1 || (*p == 2 && *q == 2) || (*p == 2 && *q == 3 && (3..=5).contains(r))
            }
        }
    }

    pub fn as_triple(&self) -> Option<[u64; 3]> {
        match self {
            TypeTriple::Typed(t) => Some(*t),
            TypeTriple::Untyped(_) => None,
        }
    }
}

impl fmt::Display for TypeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTriple::Typed([p, q, r]) => write!(f, "({p},{q},{r})"),
            TypeTriple::Untyped(ms) => {
                let s: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
                write!(f, "untyped({})", s.join(","))
            }
        }
    }
}

impl Serialize for TypeTriple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The quotient log pair `(P¹, Σ b_y · y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientPair {
    #[serde(serialize_with = "ser_qmap")]
    pub b: BTreeMap<Label, Q>,
    #[serde(with = "qserde")]
    pub degree: Q,
}

pub(crate) fn ser_qmap<S: serde::Serializer>(m: &BTreeMap<Label, Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &crate::exactgeom::fmt_q(v))?;
    }
    map.end()
}

/// Torus-invariant boundary `Σ c_ρ D_ρ + Σ c_{y,v} D_{y,v}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Boundary {
    horizontal: BTreeMap<RationalVector, Q>,
    vertical: BTreeMap<(Label, RationalVector), Q>,
}

impl Boundary {
    pub fn zero() -> Boundary {
        Boundary::default()
    }

    /// Builds and validates a boundary against `d`.
    pub fn new(
        d: &PDivisor,
        horizontal: Vec<(RationalVector, Q)>,
        vertical: Vec<(Label, RationalVector, Q)>,
    ) -> Result<Boundary> {
        let in_range = |c: &Q| !c.is_negative() && c < &Q::one();
        let mut b = Boundary::default();
        for (n, c) in horizontal {
            n.check_rank(d.rank())?;
            if !in_range(&c) {
                return Err(Error::Invalid(format!(
                    "boundary coefficient {} not in [0,1)",
                    crate::exactgeom::fmt_q(&c)
                )));
            }
            let ray = d
                .tail()
                .ray_through(&n)
                .ok_or_else(|| Error::Invalid(format!("{n} is not an extremal ray of the tail")))?
                .clone();
            if d.ray_meets_degree(&ray) {
                return Err(Error::Invalid(format!(
                    "ray {ray} meets deg; D_ρ is not a divisor on X"
                )));
            }
            if b.horizontal.insert(ray.clone(), c).is_some() {
                return Err(Error::Invalid(format!("duplicate boundary entry for ray {ray}")));
            }
        }
        for (y, v, c) in vertical {
            if !in_range(&c) {
                return Err(Error::Invalid(format!(
                    "boundary coefficient {} not in [0,1)",
                    crate::exactgeom::fmt_q(&c)
                )));
            }
            let p = d
                .coefficients()
                .get(&y)
                .ok_or_else(|| Error::Invalid(format!("boundary references unknown label {y:?}")))?;
            if p.vertex_index(&v).is_none() {
                return Err(Error::Invalid(format!(
                    "{v} is not a vertex of the coefficient at {y:?}"
                )));
            }
            if b.vertical.insert((y.clone(), v.clone()), c).is_some() {
                return Err(Error::Invalid(format!("duplicate boundary entry for ({y}, {v})")));
            }
        }
        b.horizontal.retain(|_, c| !c.is_zero());
        b.vertical.retain(|_, c| !c.is_zero());
        Ok(b)
    }

    pub fn is_zero(&self) -> bool {
        self.horizontal.is_empty() && self.vertical.is_empty()
    }

    /// `c_ρ` for the tail ray through `n` (0 if absent).
    pub fn ray_coefficient(&self, n: &RationalVector) -> Q {
        self.horizontal.get(&n.primitive()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn vertical_coefficient(&self, y: &str, v: &RationalVector) -> Q {
        self.vertical
            .get(&(y.to_string(), v.clone()))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn horizontal(&self) -> &BTreeMap<RationalVector, Q> {
        &self.horizontal
    }

    pub fn vertical(&self) -> &BTreeMap<(Label, RationalVector), Q> {
        &self.vertical
    }

    /// Smallest positive coefficient, or 1 for the zero boundary.
    pub fn min_positive_coefficient(&self) -> Q {
        self.horizontal
            .values()
            .chain(self.vertical.values())
            .filter(|c| c.is_positive())
            .min()
            .cloned()
            .unwrap_or_else(Q::one)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr};
    use crate::rv;

    fn sigma() -> Cone {
        Cone::from_ints(2, &[&[1, 0], &[1, 4]]).unwrap()
    }

    fn even2() -> PDivisor {
        PDivisor::from_vertices(
            sigma(),
            &[
                ("0", vec![rv![0, 0], rv![0, 1]]),
                ("1", vec![rv![0, 0], rv![0, 1]]),
                ("∞", vec![RationalVector::new(vec![qr(1, 2), q(0)])]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn degree_of_even_case() {
        let d = even2();
        let expected = Polyhedron::new(
            &[
                RationalVector::new(vec![qr(1, 2), q(0)]),
                RationalVector::new(vec![qr(1, 2), q(2)]),
            ],
            sigma(),
        )
        .unwrap();
        assert_eq!(d.degree(), &expected);
        assert!(d.is_proper().proper);
        assert!(d.is_proper_by_evaluation());
    }

    #[test]
    fn trivial_divisor() {
        let d = PDivisor::new(sigma(), BTreeMap::new()).unwrap();
        assert_eq!(d.degree().vertices(), &[rv![0, 0]]);
        assert!(!d.is_proper().proper);
        assert!(!d.is_proper_by_evaluation());
        assert_eq!(d.type_triple(), TypeTriple::Typed([1, 1, 1]));
        assert_eq!(d.vertex_families(None).count(), 1);
    }

    #[test]
    fn escaping_degree_is_not_proper() {
        let orth = Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let d = PDivisor::from_vertices(orth, &[("0", vec![rv![-1, 0]])]).unwrap();
        assert!(!d.is_proper().proper);
        assert!(!d.is_proper_by_evaluation());
    }

    #[test]
    fn evaluation() {
        let d = even2();
        let e = d.evaluate(&rv![4, -1]).unwrap();
        assert_eq!(e["0"], q(-1));
        assert_eq!(e["1"], q(-1));
        assert_eq!(e["∞"], q(2));
        let e = d.evaluate(&rv![0, 1]).unwrap();
        assert!(e.values().all(|v| v.is_zero()));
        assert!(d.evaluate(&rv![-1, 0]).is_err());
    }

    #[test]
    fn multiplicities_and_type() {
        let d = even2();
        assert_eq!(d.multiplicity_over("∞"), BigInt::from(2));
        assert_eq!(d.multiplicity_over("absent"), BigInt::from(1));
        assert_eq!(d.type_triple(), TypeTriple::Typed([1, 1, 2]));
        let odd = PDivisor::from_vertices(
            sigma(),
            &[
                ("0", vec![RationalVector::new(vec![qr(1, 2), q(0)])]),
                ("1", vec![RationalVector::new(vec![qr(-2, 5), q(0)])]),
            ],
        )
        .unwrap();
        assert_eq!(odd.type_triple(), TypeTriple::Typed([1, 2, 5]));
        assert_eq!(odd.degree().vertices(), &[RationalVector::new(vec![qr(1, 10), q(0)])]);
    }

    #[test]
    fn quotient_pair_and_klt() {
        let d = even2();
        let qp = d.quotient_pair(&Boundary::zero());
        assert_eq!(qp.b["∞"], qr(1, 2));
        assert_eq!(qp.degree, qr(1, 2));
        assert!(d.is_klt(&Boundary::zero()));
        let half = RationalVector::new(vec![qr(1, 2), q(0)]);
        let delta = Boundary::new(&d, vec![], vec![("∞".into(), half.clone(), qr(2, 3))]).unwrap();
        assert_eq!(d.quotient_pair(&delta).b["∞"], qr(5, 6));
        let extra = DivisorSpec::Vertical {
            point: "∞".into(),
            w: half,
        };
        assert!(d.is_plt_with(&Boundary::zero(), &extra).unwrap());
    }

    #[test]
    fn four_double_points_not_klt() {
        let orth = Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let h = RationalVector::new(vec![qr(1, 2), q(0)]);
        let d = PDivisor::from_vertices(
            orth,
            &[
                ("a", vec![h.clone()]),
                ("b", vec![h.clone()]),
                ("c", vec![h.clone()]),
                ("d", vec![h]),
            ],
        )
        .unwrap();
        assert!(!d.is_klt(&Boundary::zero()));
        assert!(matches!(d.type_triple(), TypeTriple::Untyped(_)));
        assert!(!d.platonic_filter());
    }

    #[test]
    fn platonic_list() {
        assert!(TypeTriple::Typed([1, 1, 2]).is_platonic());
        assert!(TypeTriple::Typed([2, 3, 5]).is_platonic());
        assert!(TypeTriple::Typed([2, 2, 9]).is_platonic());
        assert!(!TypeTriple::Typed([2, 3, 7]).is_platonic());
        assert!(!TypeTriple::Typed([3, 3, 3]).is_platonic());
    }

    #[test]
    fn boundary_validation() {
        let d = even2();
        // Both tail rays meet deg (vertices (1/2,0) and (1/2,2) lie on them).
        assert!(Boundary::new(&d, vec![(rv![1, 0], qr(1, 2))], vec![]).is_err());
        assert!(Boundary::new(&d, vec![], vec![("0".into(), rv![0, 1], q(1))]).is_err());
        assert!(Boundary::new(&d, vec![], vec![("0".into(), rv![1, 1], qr(1, 2))]).is_err());
    }
}
