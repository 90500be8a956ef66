use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::multigraded::MultigradedHypersurface;
use crate::error::{Error, Result};
use crate::exactgeom::linalg::{nullspace, rank};
use crate::exactgeom::{Cone, RationalVector, Q};
use crate::toricvol::{minimize_nvol, ToricCone};

/// Threshold stated for the running family `xy + z² + t·w^{2k}`, indexed by `k`
/// ("starting from k = 5"). The computed threshold refers to the exponent of
/// `w` in the kernel degree `(e, 0, −2)`; the two indexings are not reconciled.
pub const FAMILY_STATED_THRESHOLD: u32 = 5;

/// `Σ_X = pos(supp)^∨` together with the support it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegenerationConeData {
    pub support: Vec<RationalVector>,
    pub sigma_x: Cone,
}

impl Serialize for DegenerationConeData {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DegenerationConeData", 4)?;
        st.serialize_field("support", &self.support)?;
        st.serialize_field("rays", self.sigma_x.rays())?;
        st.serialize_field("lineality", self.sigma_x.lineality())?;
        st.serialize_field("facets", self.sigma_x.facets())?;
        st.end()
    }
}

/// The degeneration cone: the dual of the cone generated by the support degrees.
pub fn degeneration_cone(support: &[RationalVector], rank: usize) -> Result<DegenerationConeData> {
    let pos = Cone::new(rank, support)?;
    Ok(DegenerationConeData {
        support: support.to_vec(),
        sigma_x: pos.dual(),
    })
}

/// `N_R = ker(M̂ → M)^⊥`, the cocharacter space of the acting subtorus.
pub fn acting_subspace(kernel: &[RationalVector], rank: usize) -> Vec<RationalVector> {
    nullspace(kernel, rank)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub xi: RationalVector,
    pub in_reeb_cone: bool,
    /// `ξ ∈ rint Σ_X`.
    pub in_degeneration_cone: bool,
    /// `ξ ∈ N_R`.
    pub in_subtorus: bool,
    /// `ξ ∈ rint Σ_X \ N_R`: the cone is not K-semistable.
    pub fires: bool,
}

/// The K-semistability obstruction for a minimizer `ξ*` of the special fibre.
pub fn kss_obstruction(
    sigma_hat: &Cone,
    data: &DegenerationConeData,
    xi: &RationalVector,
    n_span: &[RationalVector],
) -> Result<ObstructionReport> {
    xi.check_rank(sigma_hat.ambient())?;
    if data.sigma_x.ambient() != sigma_hat.ambient() {
        return Err(Error::Dimension {
            expected: sigma_hat.ambient(),
            got: data.sigma_x.ambient(),
        });
    }
    let in_reeb_cone = sigma_hat.contains_relint(xi);
    let in_degeneration_cone = data.sigma_x.contains_relint(xi);
    let mut with = n_span.to_vec();
    with.push(xi.clone());
    let in_subtorus = rank(&with) == rank(n_span);
    Ok(ObstructionReport {
        xi: xi.clone(),
        in_reeb_cone,
        in_degeneration_cone,
        in_subtorus,
        fires: in_degeneration_cone && !in_subtorus,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyMember {
    pub exponent: u32,
    pub kernel_degree: RationalVector,
    pub sigma_x_is_dual_of_ray: bool,
    pub obstruction: ObstructionReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenerationFamilyReport {
    pub xi_star: RationalVector,
    pub members: Vec<FamilyMember>,
    /// Smallest exponent from which the obstruction fires for every listed member.
    pub computed_threshold: Option<u32>,
    pub stated_threshold: u32,
    pub stated_indexing: &'static str,
}

/// The quadric cone `xy + z² = 0` (the toric `A₁ × A¹`) with its `Z³` grading.
pub fn running_quadric() -> (MultigradedHypersurface, Cone) {
    let v = RationalVector::from_ints;
    let h = MultigradedHypersurface::new(
        vec![v(&[0, 1, 0]), v(&[0, -1, 2]), v(&[0, 0, 1]), v(&[1, 0, 0])],
        v(&[0, 0, 2]),
        Some(vec![vec![1, 1, 0, 0], vec![0, 0, 2, 0]]),
    )
    .expect("homogeneous");
    let cone = Cone::from_ints(3, &[&[0, 0, 1], &[0, 2, 1], &[1, 0, 0]]).expect("rank 3");
    (h, cone)
}

/// The family `xy + z² + t·wᵉ` for `e = 1..=max_exponent`: the tangent
/// direction `f ↦ wᵉ` has degree `(e, 0, −2)`, spanning the kernel; the
/// obstruction is evaluated at the toric minimizer of the special fibre.
pub fn degeneration_family(max_exponent: u32) -> Result<DegenerationFamilyReport> {
    let (h, sigma_hat) = running_quadric();
    let xi_star = minimize_nvol(
        &ToricCone::plain(sigma_hat.clone())?,
        &Q::new(1.into(), 1_000_000.into()),
    )?
    .xi_star;
    let mut members = Vec::new();
    for e in 1..=max_exponent {
        let u = &h.monomial_weight(&[0, 0, 0, e])? - &h.degree;
        let data = degeneration_cone(std::slice::from_ref(&u), 3)?;
        let half_space = Cone::from_inequalities(3, std::slice::from_ref(&u), &[])?;
        let n_span = acting_subspace(std::slice::from_ref(&u), 3);
        let obstruction = kss_obstruction(&sigma_hat, &data, &xi_star, &n_span)?;
        members.push(FamilyMember {
            exponent: e,
            kernel_degree: u,
            sigma_x_is_dual_of_ray: data.sigma_x == half_space,
            obstruction,
        });
    }
    let computed_threshold = members
        .iter()
        .rposition(|m| !m.obstruction.fires)
        .map_or(Some(1), |i| members.get(i + 1).map(|m| m.exponent));
    Ok(DegenerationFamilyReport {
        xi_star,
        members,
        computed_threshold,
        stated_threshold: FAMILY_STATED_THRESHOLD,
        stated_indexing: "k, for the equation xy + z² + t·w^(2k)",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rv;

    #[test]
    fn family_threshold() {
        let r = degeneration_family(10).unwrap();
        assert_eq!(r.xi_star, rv![1, 2, 2]);
        assert!(r.members.iter().all(|m| m.sigma_x_is_dual_of_ray));
        for m in &r.members {
            assert_eq!(m.obstruction.fires, m.exponent > 4, "e = {}", m.exponent);
        }
        assert_eq!(r.computed_threshold, Some(5));
        assert_eq!(r.stated_threshold, 5);
    }

    #[test]
    fn trivial_support_never_obstructs() {
        let data = degeneration_cone(&[rv![0, 0, 0]], 3).unwrap();
        assert_eq!(data.sigma_x, Cone::full(3));
        let (_, sigma_hat) = running_quadric();
        // Zero kernel: the acting torus is everything.
        let full = acting_subspace(&[], 3);
        let r = kss_obstruction(&sigma_hat, &data, &rv![1, 2, 2], &full).unwrap();
        assert!(r.in_degeneration_cone && r.in_subtorus && !r.fires);
    }

    #[test]
    fn dual_of_dual() {
        let s = vec![rv![4, 0, -2], rv![1, 1, 0]];
        let data = degeneration_cone(&s, 3).unwrap();
        assert_eq!(data.sigma_x.dual(), Cone::new(3, &s).unwrap());
    }
}
