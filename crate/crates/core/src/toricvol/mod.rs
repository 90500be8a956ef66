//! Toric cone singularities: discrepancy vectors, volumes of valuations,
//! normalized volume and its minimization over the Reeb cone.

mod minimize;

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgeom::linalg::{det, solve, LinearSolution};
use crate::exactgeom::rational::{pow, qserde, to_f64};
use crate::exactgeom::{fmt_q, pulling_triangulation, Cone, Lattice, Polyhedron, RationalVector, Q};

pub use minimize::{minimize_nvol, minimize_nvol_numeric, MinimizeResult};

/// A pointed full-dimensional cone with a lattice and ray boundary coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricCone {
    cone: Cone,
    lattice: Lattice,
    boundary: BTreeMap<RationalVector, Q>,
}

impl ToricCone {
    /// Validated construction: boundary keys must be extremal rays and
    /// coefficients must lie in `[0, 1)`.
    pub fn new(cone: Cone, lattice: Lattice, boundary: BTreeMap<RationalVector, Q>) -> Result<ToricCone> {
        for c in boundary.values() {
            if c.is_negative() || c >= &Q::one() {
                return Err(Error::Invalid(format!(
                    "boundary coefficient {} not in [0,1)",
                    fmt_q(c)
                )));
            }
        }
        Self::with_raw_boundary(cone, lattice, boundary)
    }

    /// Like [`ToricCone::new`] but accepts any rational coefficients; used for
    /// toric fibres of degenerations that are not special.
    pub fn with_raw_boundary(cone: Cone, lattice: Lattice, boundary: BTreeMap<RationalVector, Q>) -> Result<ToricCone> {
        if !cone.is_pointed() || !cone.is_full_dim() {
            return Err(Error::Invalid("toric cone must be pointed and full-dimensional".into()));
        }
        if lattice.rank() != cone.ambient() {
            return Err(Error::Dimension {
                expected: cone.ambient(),
                got: lattice.rank(),
            });
        }
        let mut b = BTreeMap::new();
        for (r, c) in boundary {
            let ray = cone
                .ray_through(&r)
                .ok_or_else(|| Error::Invalid(format!("boundary key {r} is not an extremal ray")))?;
            if !c.is_zero() {
                b.insert(ray.clone(), c);
            }
        }
        Ok(ToricCone {
            cone,
            lattice,
            boundary: b,
        })
    }

    /// Standard lattice, no boundary.
    pub fn plain(cone: Cone) -> Result<ToricCone> {
        let n = cone.ambient();
        ToricCone::new(cone, Lattice::standard(n), BTreeMap::new())
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.cone.ambient()
    }

    /// Coefficient of the boundary on the ray through `r`.
    pub fn coefficient(&self, r: &RationalVector) -> Q {
        self.boundary.get(&r.primitive()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn boundary(&self) -> &BTreeMap<RationalVector, Q> {
        &self.boundary
    }

    /// Lattice-primitive generators of the extremal rays.
    pub fn ray_generators(&self) -> Vec<RationalVector> {
        self.cone
            .rays()
            .iter()
            .map(|r| self.lattice.primitive_generator(r))
            .collect()
    }

    pub fn is_simplicial(&self) -> bool {
        self.cone.rays().len() == self.rank()
    }
}

/// Wire format: `{"rays": [...], "lattice": [...], "boundary": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToricConeInput {
    pub rays: Vec<RationalVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec<RationalVector>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<BoundaryEntry>,
}

/// Either a coefficient parallel to `rays`, or an explicit `{ray, c}` pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryEntry {
    Keyed {
        ray: RationalVector,
        #[serde(with = "qserde")]
        c: Q,
    },
    Parallel(#[serde(with = "qserde")] Q),
}

impl ToricConeInput {
    pub fn build(&self) -> Result<ToricCone> {
        let n = self
            .rays
            .first()
            .map(|r| r.rank())
            .ok_or_else(|| Error::Invalid("toric cone needs rays".into()))?;
        let cone = Cone::new(n, &self.rays)?;
        let lattice = match &self.lattice {
            None => Lattice::standard(n),
            Some(b) => Lattice::from_basis(b.clone())?,
        };
        let mut boundary = BTreeMap::new();
        for (i, e) in self.boundary.iter().enumerate() {
            let (r, c) = match e {
                BoundaryEntry::Keyed { ray, c } => (ray.clone(), c.clone()),
                BoundaryEntry::Parallel(c) => (
                    self.rays
                        .get(i)
                        .cloned()
                        .ok_or_else(|| Error::Invalid("more boundary entries than rays".into()))?,
                    c.clone(),
                ),
            };
            if boundary.insert(r.primitive(), c).is_some() {
                return Err(Error::Invalid(format!("duplicate boundary entry for {r}")));
            }
        }
        ToricCone::new(cone, lattice, boundary)
    }

    pub fn from_cone(t: &ToricCone) -> ToricConeInput {
        ToricConeInput {
            rays: t.cone.rays().to_vec(),
            lattice: (!t.lattice.is_standard()).then(|| t.lattice.basis().to_vec()),
            boundary: t
                .boundary
                .iter()
                .map(|(r, c)| BoundaryEntry::Keyed {
                    ray: r.clone(),
                    c: c.clone(),
                })
                .collect(),
        }
    }
}

/// The unique `a ∈ M_Q` with `⟨a, n_ρ⟩ = 1 − c_ρ` on every extremal ray.
pub fn toric_gorenstein(t: &ToricCone) -> Result<RationalVector> {
    let gens = t.ray_generators();
    let rhs: Vec<Q> = t.cone.rays().iter().map(|r| Q::one() - t.coefficient(r)).collect();
    match solve(&gens, &rhs, t.rank()) {
        LinearSolution::Unique(a) => Ok(a),
        LinearSolution::Inconsistent { rows } => Err(Error::NotQGorenstein {
            equations: rows
                .iter()
                .map(|&i| format!("⟨a,{}⟩ = {}", gens[i], fmt_q(&rhs[i])))
                .collect(),
        }),
        LinearSolution::Underdetermined { .. } => Err(Error::AmbiguousGorenstein {
            equations: gens
                .iter()
                .zip(&rhs)
                .map(|(g, r)| format!("⟨a,{g}⟩ = {}", fmt_q(r)))
                .collect(),
        }),
    }
}

/// `a(ξ) = ⟨a, ξ⟩` for `ξ` in the cone.
pub fn log_discrepancy_xi(t: &ToricCone, a: &RationalVector, xi: &RationalVector) -> Result<Q> {
    xi.check_rank(t.rank())?;
    if !t.cone.contains(xi) {
        return Err(Error::Precondition(format!("{xi} is not in the cone")));
    }
    Ok(a.dot(xi))
}

/// `vol(ξ)` as an explicit rational function: a sum over a triangulation of
/// the dual cone of `c_S / Π_{i∈S} ⟨r_i, ξ⟩`.
#[derive(Clone, Debug)]
pub struct VolumeFunction {
    n: usize,
    dual_rays: Vec<RationalVector>,
    terms: Vec<(Q, Vec<usize>)>,
}

impl VolumeFunction {
    pub fn new(t: &ToricCone) -> Result<VolumeFunction> {
        let n = t.rank();
        let dual_rays = t.cone.dual().rays().to_vec();
        // Cross-section of the dual cone at an interior point of the cone.
        let xi0 = t.cone.rays().iter().fold(RationalVector::zeros(n), |acc, r| &acc + r);
        let pts: Vec<RationalVector> = dual_rays.iter().map(|r| r.scale(&(Q::one() / r.dot(&xi0)))).collect();
        let section = Polyhedron::polytope(&pts)?;
        let index_of: Vec<usize> = section
            .vertices()
            .iter()
            .map(|v| pts.iter().position(|p| p == v).expect("section vertices are dual rays"))
            .collect();
        let scale = t.lattice.covolume().clone();
        let mut terms = Vec::new();
        for s in pulling_triangulation(&section)? {
            let idx: Vec<usize> = s.iter().map(|&i| index_of[i]).collect();
            let rows: Vec<RationalVector> = idx.iter().map(|&i| dual_rays[i].clone()).collect();
            terms.push((det(&rows).abs() * &scale, idx));
        }
        Ok(VolumeFunction { n, dual_rays, terms })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn dual_rays(&self) -> &[RationalVector] {
        &self.dual_rays
    }

    /// True if `ξ` pairs positively with every dual ray.
    pub fn is_interior(&self, xi: &RationalVector) -> bool {
        self.dual_rays.iter().all(|r| r.dot(xi).is_positive())
    }

    pub fn eval(&self, xi: &RationalVector) -> Result<Q> {
        let l = self.pairings(xi)?;
        Ok(self.terms.iter().fold(Q::zero(), |acc, (c, s)| {
            acc + c / s.iter().fold(Q::one(), |p, &i| p * &l[i])
        }))
    }

    /// Exact gradient.
    pub fn gradient(&self, xi: &RationalVector) -> Result<RationalVector> {
        let l = self.pairings(xi)?;
        let mut g = vec![Q::zero(); self.n];
        for (c, s) in &self.terms {
            let val = c / s.iter().fold(Q::one(), |p, &i| p * &l[i]);
            for &i in s {
                let w = &val / &l[i];
                for (j, gj) in g.iter_mut().enumerate() {
                    *gj -= &w * &self.dual_rays[i][j];
                }
            }
        }
        Ok(RationalVector::new(g))
    }

    /// Floating-point evaluation, gradient and Hessian.
    pub fn eval_f64(&self, xi: &[f64]) -> Option<(f64, Vec<f64>, Vec<Vec<f64>>)> {
        let rays: Vec<Vec<f64>> = self.dual_rays.iter().map(|r| r.to_f64()).collect();
        let l: Vec<f64> = rays
            .iter()
            .map(|r| r.iter().zip(xi).map(|(a, b)| a * b).sum())
            .collect();
        if l.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let n = self.n;
        let mut f = 0.0;
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        for (c, s) in &self.terms {
            let val = to_f64(c) / s.iter().map(|&i| l[i]).product::<f64>();
            f += val;
            let mut sg = vec![0.0; n];
            for &i in s {
                for j in 0..n {
                    sg[j] += rays[i][j] / l[i];
                }
            }
            for j in 0..n {
                g[j] -= val * sg[j];
                for k in 0..n {
                    let mut second = sg[j] * sg[k];
                    for &i in s {
                        second += rays[i][j] * rays[i][k] / (l[i] * l[i]);
                    }
                    h[j][k] += val * second;
                }
            }
        }
        Some((f, g, h))
    }

    fn pairings(&self, xi: &RationalVector) -> Result<Vec<Q>> {
        xi.check_rank(self.n)?;
        let l: Vec<Q> = self.dual_rays.iter().map(|r| r.dot(xi)).collect();
        if l.iter().any(|x| !x.is_positive()) {
            return Err(Error::Unbounded(format!(
                "{xi} is not in the interior of the cone; the truncation is unbounded"
            )));
        }
        Ok(l)
    }
}

/// `vol(ξ) = n! · vol_M({u ∈ σ^∨ : ⟨u, ξ⟩ ≤ 1})`.
pub fn volume_xi(t: &ToricCone, xi: &RationalVector) -> Result<Q> {
    VolumeFunction::new(t)?.eval(xi)
}

/// Normalized volume, with `+∞` when `a(ξ) ≤ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NvolValue {
    Finite(Q),
    Infinite,
}

impl NvolValue {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            NvolValue::Finite(q) => Some(q),
            NvolValue::Infinite => None,
        }
    }
}

impl std::fmt::Display for NvolValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NvolValue::Finite(q) => write!(f, "{}", fmt_q(q)),
            NvolValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for NvolValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `nvol(ξ) = a(ξ)^n · vol(ξ)`.
pub fn nvol_xi(t: &ToricCone, xi: &RationalVector) -> Result<NvolValue> {
    let a = toric_gorenstein(t)?;
    let ax = log_discrepancy_xi(t, &a, xi)?;
    if !ax.is_positive() {
        return Ok(NvolValue::Infinite);
    }
    let v = volume_xi(t, xi)?;
    Ok(NvolValue::Finite(pow(&ax, t.rank() as u32) * v))
}

/// Upper bound for the local volume of `(X(D), Δ)` from the toric fibre of the
/// degeneration at `z`, evaluated at the valuation of `w ∈ rint D_z`.
pub fn nvol_via_fibre(
    d: &crate::pdiv::PDivisor,
    delta: &crate::pdiv::Boundary,
    z: &str,
    w: &RationalVector,
) -> Result<Q> {
    let p = d.coefficient(z);
    if !p.contains_relint(w) {
        return Err(Error::Precondition(format!(
            "{w} is not in the relative interior of D_{z}"
        )));
    }
    let sigma = crate::kollar::sigma_z(d, delta, z)?;
    let t = sigma.toric_cone()?;
    let (mw, _) = d.lattice().multiplicity(w);
    let xi = mw.extend(Q::from_integer(crate::pdiv::vertex_multiplicity(w)));
    match nvol_xi(&t, &xi)? {
        NvolValue::Finite(v) => Ok(v),
        NvolValue::Infinite => Err(Error::NotKlt(format!("a(ξ) ≤ 0 at ξ = {xi}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr};
    use crate::rv;

    fn example_cone() -> ToricCone {
        ToricCone::plain(Cone::from_ints(3, &[&[0, 0, 1], &[0, 2, 1], &[1, 0, 0]]).unwrap()).unwrap()
    }

    #[test]
    fn discrepancy_vectors() {
        let orth = ToricCone::plain(Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap()).unwrap();
        assert_eq!(toric_gorenstein(&orth).unwrap(), rv![1, 1]);
        assert_eq!(toric_gorenstein(&example_cone()).unwrap(), rv![1, 0, 1]);
    }

    #[test]
    fn example_cone_values() {
        let t = example_cone();
        let xi = rv![1, 2, 2];
        let a = toric_gorenstein(&t).unwrap();
        assert_eq!(log_discrepancy_xi(&t, &a, &xi).unwrap(), q(3));
        assert_eq!(volume_xi(&t, &xi).unwrap(), qr(1, 2));
        assert_eq!(nvol_xi(&t, &xi).unwrap(), NvolValue::Finite(qr(27, 2)));
    }

    #[test]
    fn quotient_cones() {
        for n in 2..=3usize {
            for m in 1..=6i64 {
                let extra = RationalVector::new(vec![qr(1, m); n]);
                let lat = Lattice::generated_by(n, &[extra]).unwrap();
                let gens: Vec<_> = (0..n).map(|i| RationalVector::unit(n, i)).collect();
                let t = ToricCone::new(Cone::new(n, &gens).unwrap(), lat, BTreeMap::new()).unwrap();
                let xi = RationalVector::from_ints(&vec![1; n]);
                let expected = Q::from_integer((n as i64).pow(n as u32).into()) / q(m);
                assert_eq!(nvol_xi(&t, &xi).unwrap(), NvolValue::Finite(expected));
            }
        }
    }

    #[test]
    fn nonpositive_discrepancy_is_infinite() {
        let orth = ToricCone::plain(Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap()).unwrap();
        assert!(volume_xi(&orth, &rv![1, 0]).is_err());
        let t = ToricCone::with_raw_boundary(
            Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap(),
            Lattice::standard(2),
            [(rv![1, 0], q(3)), (rv![0, 1], q(0))].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(nvol_xi(&t, &rv![1, 1]).unwrap(), NvolValue::Infinite);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let cone = Cone::from_ints(3, &[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]]).unwrap();
        let f = VolumeFunction::new(&ToricCone::plain(cone).unwrap()).unwrap();
        let xi = RationalVector::new(vec![qr(1, 3), qr(1, 2), q(1)]);
        let g = f.gradient(&xi).unwrap();
        let h = qr(1, 1_000_000);
        for j in 0..3 {
            let e = RationalVector::unit(3, j).scale(&h);
            let fd = (f.eval(&(&xi + &e)).unwrap() - f.eval(&(&xi - &e)).unwrap()) / (&h * q(2));
            assert!((to_f64(&fd) - to_f64(&g[j])).abs() < 1e-6);
        }
    }
}
