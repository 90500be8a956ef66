//! Exact rational linear algebra and low-dimensional polyhedral geometry.

pub mod cone;
pub mod lattice;
pub mod linalg;
pub mod polyhedron;
pub mod rational;
pub mod vector;
pub mod volume;

use std::collections::BTreeSet;

use num_bigint::BigInt;

pub use cone::Cone;
pub use lattice::Lattice;
pub use polyhedron::{Facet, Polyhedron};
pub use rational::{fmt_q, parse_q, q, qr, Int, Q};
pub use vector::RationalVector;
pub use volume::{polytope_volume, pulling_triangulation};

use crate::error::{Error, Result};

/// `{u : ⟨u, v⟩ ≥ 0 for all v ∈ c}`.
pub fn dual_cone(c: &Cone) -> Cone {
    c.dual()
}

/// `μ(v)` relative to `lat`, together with the lattice point `μ(v)·v`.
pub fn primitive_and_multiplicity(v: &RationalVector, lat: &Lattice) -> Result<(RationalVector, BigInt)> {
    if v.is_zero() {
        return Err(Error::Invalid("multiplicity of the zero vector is undefined".into()));
    }
    v.check_rank(lat.rank())?;
    Ok(lat.multiplicity(v))
}

pub fn minkowski_sum(p: &Polyhedron, q: &Polyhedron) -> Result<Polyhedron> {
    p.minkowski_sum(q)
}

/// Either kind of object `face_sets` accepts.
pub enum FaceSetTarget<'a> {
    Cone(&'a Cone),
    Polyhedron(&'a Polyhedron),
}

/// Facets of the (tail) cone whose minimizing face contains `v`.
pub fn face_sets(target: FaceSetTarget<'_>, v: &RationalVector) -> Result<BTreeSet<RationalVector>> {
    match target {
        FaceSetTarget::Cone(c) => c.face_sets(v),
        FaceSetTarget::Polyhedron(p) => p.face_sets(v),
    }
}
