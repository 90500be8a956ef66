//! Kollár components of complexity-one T-singularities: the toric
//! degeneration `σ_z`, the extracting f-divisors with ampleness certificates,
//! and the witness search for bounded log discrepancies.

mod combine;
mod degen;
mod fdivisor;
mod witness;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::disc::{log_discrepancy, solve_gorenstein, DivisorSpec};
use crate::error::{Error, Result};
use crate::exactgeom::rational::qserde;
use crate::exactgeom::{fmt_q, RationalVector, Q};
use crate::pdiv::{vertex_multiplicity, Boundary, PDivisor};
use crate::toricvol::{log_discrepancy_xi, toric_gorenstein};

pub use combine::{combine_rays, combine_rays_min, ell_of, Combination};
pub use degen::{height_bounds, sigma_z, DegenCone, DegenRay, RayOrigin};
pub use fdivisor::{
    ample_certificate, fdivisor_horizontal, fdivisor_vertical, AmpleCertificate, Cell, CellSource, CertificateSummary,
    FDivisor,
};
pub use witness::{mld_bound_witness, Branch, MRay, MSet, MldWitness};

/// `(a_(X,Δ)(D_{z,w}), a_(X(σ_z),Δ_z)(E₀))`, checked for equality.
pub fn toric_crosscheck(d: &PDivisor, delta: &Boundary, z: &str, w: &RationalVector) -> Result<(Q, Q)> {
    let g = solve_gorenstein(d, delta)?;
    let spec = DivisorSpec::Vertical {
        point: z.to_string(),
        w: w.clone(),
    };
    let direct = log_discrepancy(&g, d, delta, &spec)?;
    let t = sigma_z(d, delta, z)?.toric_cone()?;
    let a = toric_gorenstein(&t)?;
    let xi = w.extend(Q::one()).scale(&Q::from_integer(vertex_multiplicity(w)));
    let toric = log_discrepancy_xi(&t, &a, &xi)?;
    if direct != toric {
        return Err(Error::Certificate(format!(
            "discrepancy of D_({z},{w}) is {} on X but {} on the toric fibre",
            fmt_q(&direct),
            fmt_q(&toric)
        )));
    }
    Ok((direct, toric))
}

/// Result of testing a vertical divisor `D_{z,v}` over `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerticalComponent {
    pub is_weak: bool,
    pub is_kollar: bool,
    #[serde(with = "qserde")]
    pub discrepancy: Q,
    /// `Σ_{y≠z} b_{Δ,y}`, which decides the Kollár property.
    #[serde(with = "qserde")]
    pub rest_b: Q,
}

/// `D_{z,v}` for `v ∈ rint D_z` is a weak component; it is a Kollár
/// component exactly when `Σ_{y≠z} b_{Δ,y} < 1`.
pub fn vertical_component(d: &PDivisor, delta: &Boundary, z: &str, v: &RationalVector) -> Result<VerticalComponent> {
    v.check_rank(d.rank())?;
    if !d.coefficient(z).contains_relint(v) {
        return Err(Error::Precondition(format!(
            "{v} is not in the relative interior of D_{z}"
        )));
    }
    if !d.is_klt(delta) {
        return Err(Error::NotKlt("the pair is not klt".into()));
    }
    let g = solve_gorenstein(d, delta)?;
    let discrepancy = log_discrepancy(
        &g,
        d,
        delta,
        &DivisorSpec::Vertical {
            point: z.to_string(),
            w: v.clone(),
        },
    )?;
    let qp = d.quotient_pair(delta);
    let rest_b =
        qp.b.iter()
            .filter(|(y, _)| y.as_str() != z)
            .fold(Q::zero(), |acc, (_, b)| acc + b);
    Ok(VerticalComponent {
        is_weak: true,
        is_kollar: rest_b < Q::one(),
        discrepancy,
        rest_b,
    })
}

/// Result of testing a horizontal divisor `D_ρ` over `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HorizontalComponent {
    pub is_kollar: bool,
    pub ray: RationalVector,
    #[serde(with = "qserde")]
    pub discrepancy: Q,
}

/// Every primitive `n_ρ` in the interior of the tail gives a Kollár component.
pub fn horizontal_component(d: &PDivisor, delta: &Boundary, n: &RationalVector) -> Result<HorizontalComponent> {
    n.check_rank(d.rank())?;
    if !d.tail().is_interior_point(n) {
        return Err(Error::Precondition(format!(
            "{n} is not in the interior of the tail cone"
        )));
    }
    if !d.is_klt(delta) {
        return Err(Error::NotKlt("the pair is not klt".into()));
    }
    let g = solve_gorenstein(d, delta)?;
    let ray = d.lattice().primitive_generator(n);
    let discrepancy = log_discrepancy(&g, d, delta, &DivisorSpec::Horizontal(ray.clone()))?;
    if !discrepancy.is_positive() {
        return Err(Error::NotKlt(format!("nonpositive discrepancy on {ray}")));
    }
    Ok(HorizontalComponent {
        is_kollar: true,
        ray,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr, Cone};
    use crate::rv;

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
    fn crosscheck_even_case() {
        let d = even2();
        let z = Boundary::zero();
        assert_eq!(toric_crosscheck(&d, &z, "∞", &rv![1, 1]).unwrap(), (q(2), q(2)));
        let vertex = RationalVector::new(vec![qr(1, 2), q(0)]);
        assert_eq!(toric_crosscheck(&d, &z, "∞", &vertex).unwrap(), (q(1), q(1)));
    }

    #[test]
    fn vertical_even_case() {
        let d = even2();
        let r = vertical_component(&d, &Boundary::zero(), "∞", &rv![1, 1]).unwrap();
        assert!(r.is_weak && r.is_kollar);
        assert_eq!(r.discrepancy, q(2));
        assert_eq!(r.rest_b, q(0));
        let vertex = RationalVector::new(vec![qr(1, 2), q(0)]);
        assert!(vertical_component(&d, &Boundary::zero(), "∞", &vertex).is_err());
    }

    #[test]
    fn vertical_at_two_point_of_type_22r() {
        // Type (2,2,3): tail cone{(1,0),(1,3)}, u = (−1,0).
        let d = PDivisor::from_vertices(
            Cone::from_ints(2, &[&[1, 0], &[1, 3]]).unwrap(),
            &[
                ("0", vec![RationalVector::new(vec![qr(1, 2), q(0)])]),
                ("1", vec![RationalVector::new(vec![qr(1, 2), q(1)])]),
                ("∞", vec![RationalVector::new(vec![qr(-2, 3), q(0)])]),
            ],
        )
        .unwrap();
        let r = vertical_component(&d, &Boundary::zero(), "0", &rv![1, 1]).unwrap();
        assert!(r.is_weak && !r.is_kollar);
        assert!(r.rest_b >= q(1));
    }

    #[test]
    fn horizontal_even_case() {
        let d = even2();
        let r = horizontal_component(&d, &Boundary::zero(), &rv![1, 2]).unwrap();
        assert!(r.is_kollar);
        assert_eq!(r.discrepancy, q(3));
        let r = horizontal_component(&d, &Boundary::zero(), &rv![1, 1]).unwrap();
        assert_eq!(r.discrepancy, q(3));
        assert!(horizontal_component(&d, &Boundary::zero(), &rv![1, 0]).is_err());
    }
}
