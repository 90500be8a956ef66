use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactgeom::rational::qserde;
use crate::exactgeom::{Cone, Lattice, RationalVector, Q};
use crate::pdiv::{vertex_b, vertex_multiplicity, Boundary, Label, PDivisor};
use crate::toricvol::ToricCone;

/// Where an extremal ray of `σ_z` comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RayOrigin {
    /// `μ(v)(v, 1)` for a vertex `v` of `D_z`.
    Upper { vertex: RationalVector },
    /// `(n_ρ, 0)` for a tail ray disjoint from the degree.
    Tail { ray: RationalVector },
    /// `μ(s)(s, −1)` for a vertex `s = Σ_{y≠z} v_y` of `Σ_{y≠z} D_y`.
    Lower {
        vertex: RationalVector,
        decomposition: BTreeMap<Label, RationalVector>,
    },
}

/// An extremal ray of `σ_z` with its boundary coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenRay {
    /// Primitive generator in `N × Z`.
    pub generator: RationalVector,
    pub origin: RayOrigin,
    /// Coefficient making the toric discrepancy agree with the complexity-one one.
    #[serde(with = "qserde")]
    pub c: Q,
    /// The displayed sum `Σ_{y≠z} c_{y,v_y}` on lower rays (equal to `c` elsewhere).
    #[serde(with = "qserde")]
    pub display_c: Q,
}

impl DegenRay {
    pub fn height(&self) -> Q {
        self.generator[self.generator.rank() - 1].clone()
    }
}

/// The toric special fibre `X(σ_z)` of the degeneration at `z`, with `Δ_z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenCone {
    pub z: Label,
    #[serde(skip)]
    pub cone: Cone,
    pub lattice: Lattice,
    pub rays: Vec<DegenRay>,
    /// All coefficients of `Δ_z` lie in `[0, 1)`.
    pub special: bool,
}

impl DegenCone {
    /// The fibre as a toric cone with raw boundary coefficients.
    pub fn toric_cone(&self) -> Result<ToricCone> {
        let boundary = self.rays.iter().map(|r| (r.generator.clone(), r.c.clone())).collect();
        ToricCone::with_raw_boundary(self.cone.clone(), self.lattice.clone(), boundary)
    }

    /// Ray data by primitive generator.
    pub fn ray(&self, generator: &RationalVector) -> Option<&DegenRay> {
        self.rays.iter().find(|r| r.generator.same_ray(generator))
    }

    pub fn max_height(&self) -> Q {
        self.rays.iter().map(DegenRay::height).max().unwrap_or_else(Q::zero)
    }

    pub fn min_height(&self) -> Q {
        self.rays.iter().map(DegenRay::height).min().unwrap_or_else(Q::zero)
    }
}

/// `σ_z = pos(D_z × {1} ∪ tail × {0} ∪ (Σ_{y≠z} D_y) × {−1})`, reduced to its
/// extremal rays, with the boundary `Δ_z` of the toric special fibre.
///
/// On a lower ray over `s` the coefficient is `1 − μ(s)(1 − Σ_{y≠z} b_{y,v_y})`,
/// which is what makes `a(D_ρ̂) = 1 − c` hold on the fibre; it equals the plain
/// sum `Σ c_{y,v_y}` when `μ(s) = 1` and all vertices are lattice points.
pub fn sigma_z(d: &PDivisor, delta: &Boundary, z: &str) -> Result<DegenCone> {
    let r = d.rank();
    let dz = d.coefficient(z);
    let rest = d.degree_without(z);

    let mut candidates: Vec<(RationalVector, RayOrigin)> = Vec::new();
    for v in dz.vertices() {
        let mu = Q::from_integer(vertex_multiplicity(v));
        candidates.push((v.extend(Q::one()).scale(&mu), RayOrigin::Upper { vertex: v.clone() }));
    }
    for n in d.tail().rays() {
        candidates.push((n.extend(Q::zero()), RayOrigin::Tail { ray: n.clone() }));
    }
    let others: Vec<&Label> = d.labels().filter(|y| y.as_str() != z).collect();
    for s in rest.vertices() {
        let mu = Q::from_integer(vertex_multiplicity(s));
        let decomposition = decompose(d, &others, s)
            .ok_or_else(|| Error::Invalid(format!("vertex {s} of Σ_(y≠{z}) D_y has no vertex decomposition")))?;
        candidates.push((
            s.extend(-Q::one()).scale(&mu),
            RayOrigin::Lower {
                vertex: s.clone(),
                decomposition,
            },
        ));
    }

    let gens: Vec<RationalVector> = candidates.iter().map(|(g, _)| g.clone()).collect();
    let cone = Cone::new(r + 1, &gens)?;
    let lattice = Lattice::standard(r + 1);

    let mut rays = Vec::new();
    for ray in cone.rays() {
        let Some((generator, origin)) = candidates.iter().find(|(g, _)| g.same_ray(ray)) else {
            continue;
        };
        let generator = lattice.primitive_generator(generator);
        let (c, display_c) = match origin {
            RayOrigin::Upper { vertex } => {
                let c = delta.vertical_coefficient(z, vertex);
                (c.clone(), c)
            }
            RayOrigin::Tail { ray } => {
                let c = delta.ray_coefficient(ray);
                (c.clone(), c)
            }
            RayOrigin::Lower { vertex, decomposition } => {
                let mu = Q::from_integer(vertex_multiplicity(vertex));
                let (sum_b, sum_c) = decomposition.iter().fold((Q::zero(), Q::zero()), |(b, c), (y, v)| {
                    let cy = delta.vertical_coefficient(y, v);
                    (b + vertex_b(v, &cy), c + cy)
                });
                (Q::one() - mu * (Q::one() - sum_b), sum_c)
            }
        };
        rays.push(DegenRay {
            generator,
            origin: origin.clone(),
            c,
            display_c,
        });
    }
    let special = rays.iter().all(|r| !r.c.is_negative() && r.c < Q::one());
    Ok(DegenCone {
        z: z.to_string(),
        cone,
        lattice,
        rays,
        special,
    })
}

/// The decomposition of a vertex of a Minkowski sum into vertices of the
/// summands; it is unique, so the first matching family is returned.
fn decompose(d: &PDivisor, labels: &[&Label], s: &RationalVector) -> Option<BTreeMap<Label, RationalVector>> {
    let sizes: Vec<usize> = labels.iter().map(|y| d.coefficients()[*y].vertices().len()).collect();
    let total: usize = sizes.iter().product();
    for mut idx in 0..total {
        let mut choice = BTreeMap::new();
        let mut sum = RationalVector::zeros(d.rank());
        for (k, y) in labels.iter().enumerate() {
            let v = &d.coefficients()[*y].vertices()[idx % sizes[k]];
            idx /= sizes[k];
            sum = &sum + v;
            choice.insert((*y).clone(), v.clone());
        }
        if &sum == s {
            return Some(choice);
        }
    }
    None
}

/// Heights of the primitive generators, bounded below by −p and above by q for type `(1,p,q)`.
pub fn height_bounds(sigma: &DegenCone) -> (Q, Q) {
    (sigma.min_height(), sigma.max_height())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::solve_gorenstein;
    use crate::exactgeom::{q, qr};
    use crate::rv;
    use crate::toricvol::toric_gorenstein;

    fn even2() -> PDivisor {
        PDivisor::from_vertices(
            Cone::from_ints(2, &[&[1, 0], &[1, 4]]).unwrap(),
            &[
                ("0", vec![rv![0, 0], rv![0, 1]]),
                ("1", vec![rv![0, 0], rv![0, 1]]),
                ("∞", vec![RationalVector::new(vec![qr(1, 2), q(0)])]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn even_case_rays() {
        let s = sigma_z(&even2(), &Boundary::zero(), "∞").unwrap();
        let mut gens: Vec<_> = s.rays.iter().map(|r| r.generator.clone()).collect();
        gens.sort();
        assert_eq!(gens, vec![rv![0, 0, -1], rv![0, 2, -1], rv![1, 0, 2]]);
        assert!(s.special);
        assert_eq!(height_bounds(&s), (q(-1), q(2)));
    }

    #[test]
    fn fibre_discrepancy_vector() {
        let d = even2();
        let s = sigma_z(&d, &Boundary::zero(), "∞").unwrap();
        let t = s.toric_cone().unwrap();
        assert_eq!(toric_gorenstein(&t).unwrap(), rv![3, 0, -1]);
        let g = solve_gorenstein(&d, &Boundary::zero()).unwrap();
        assert_eq!(g.u, rv![-3, 0]);
    }

    #[test]
    fn trivial_divisor_is_not_pointed() {
        let d = PDivisor::new(Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap(), BTreeMap::new()).unwrap();
        let s = sigma_z(&d, &Boundary::zero(), "0").unwrap();
        assert!(!s.cone.is_pointed());
        assert!(s.toric_cone().is_err());
    }
}
