use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::combine::{combine_rays, ell_of};
use super::degen::sigma_z;
use super::fdivisor::{ample_certificate, fdivisor_horizontal, fdivisor_vertical, CertificateSummary};
use super::{horizontal_component, toric_crosscheck, vertical_component};
use crate::disc::{log_discrepancy, solve_gorenstein, DivisorSpec, GorensteinData};
use crate::error::{Error, Result};
use crate::exactgeom::linalg::rank;
use crate::exactgeom::rational::qserde;
use crate::exactgeom::{fmt_q, Cone, RationalVector, Q};
use crate::pdiv::{vertex_b, vertex_multiplicity, Boundary, Label, PDivisor, TypeTriple, VertexFamily};
use crate::toricvol::toric_gorenstein;

/// Which bound the witness search used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// Type `(1,p,q)` with `Σ_{y≠z} b < 1`: vertical component, `a ≤ 2·dim − 1`.
    #[serde(rename = "vertical-2d-1")]
    Vertical,
    /// Type `(1,p,q)` otherwise: horizontal component, `a ≤ 2/ε`.
    #[serde(rename = "horizontal-2-eps")]
    Horizontal,
    /// Types `(2,p,q)`: the ray set `M`, `a ≤ 156·(dim − 1)`.
    #[serde(rename = "m-construction")]
    MConstruction,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::Vertical => "vertical-2d-1",
            Branch::Horizontal => "horizontal-2-eps",
            Branch::MConstruction => "m-construction",
        };
        f.write_str(s)
    }
}

/// The part of `M` a ray belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MSet {
    /// Tail ray disjoint from the degree.
    M1,
    /// Ray of a family of type `(2,p′,q′)`.
    M2,
    /// Ray of a family of type `(1,r,s)` with a lattice vertex at `z`.
    M3,
    /// The swapped families `ρ₁` and `ρ₂′`.
    M4,
}

/// One ray of the set `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MRay {
    pub set: MSet,
    /// Lattice point used in the sum `η = Σ n_ρ`.
    pub point: RationalVector,
    #[serde(with = "qserde")]
    pub discrepancy: Q,
    pub note: String,
}

/// A Kollár component with a certified bound on its log discrepancy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MldWitness {
    pub branch: Branch,
    pub type_triple: TypeTriple,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Label>,
    pub spec: DivisorSpec,
    #[serde(with = "qserde")]
    pub discrepancy: Q,
    #[serde(with = "qserde")]
    pub bound: Q,
    /// The component passed the Kollár test, its discrepancy is within the
    /// bound and its ampleness certificate verified.
    pub certified: bool,
    /// Discrepancy of the combination prescribed by the branch's argument,
    /// before the search for a smaller witness.
    #[serde(with = "qserde")]
    pub construction_discrepancy: Q,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub m_rays: Vec<MRay>,
    pub ample: Option<CertificateSummary>,
    pub diagnostics: Vec<String>,
}

/// Searches a torus-invariant Kollár component with bounded discrepancy.
///
/// `eps` is the coefficient lower bound (the smallest positive coefficient
/// of `Δ`, or 1 when `Δ = 0`).
pub fn mld_bound_witness(d: &PDivisor, delta: &Boundary, eps: &Q) -> Result<MldWitness> {
    if !eps.is_positive() {
        return Err(Error::Invalid("ε must be positive".into()));
    }
    if !d.is_klt(delta) {
        return Err(Error::NotKlt(format!(
            "quotient pair has degree {} (klt needs all b_y < 1 and Σ b_y < 2)",
            fmt_q(&d.quotient_pair(delta).degree)
        )));
    }
    let g = solve_gorenstein(d, delta)?;
    let tt = d.type_triple();
    let [p0, _, q] = tt
        .as_triple()
        .ok_or_else(|| Error::NotKlt(format!("type {tt} is not platonic")))?;
    if p0 == 1 {
        let qp = d.quotient_pair(delta);
        let rest = |z: &str| {
            qp.b.iter()
                .filter(|(y, _)| y.as_str() != z)
                .fold(Q::zero(), |acc, (_, b)| acc + b)
        };
        let candidates: Vec<&Label> = d
            .labels()
            .filter(|y| d.multiplicity_over(y).to_u64() == Some(q))
            .collect();
        if let Some(z) = candidates.iter().find(|z| rest(z) < Q::one()) {
            return vertical_branch(d, delta, &g, z, tt);
        }
        if candidates.is_empty() {
            return Err(Error::Precondition("no stored coefficient to degenerate at".into()));
        }
        horizontal_branch(d, delta, &g, eps, tt)
    } else {
        m_construction(d, delta, &g, tt)
    }
}

/// Nonnegative integer combinations `Σ k_i g_i` with `k_i ≤ kmax`.
fn small_combinations(gens: &[RationalVector], kmax: u32) -> impl Iterator<Item = RationalVector> + '_ {
    let base = kmax as usize + 1;
    let total = base.checked_pow(gens.len() as u32).unwrap_or(usize::MAX);
    (1..total).map(move |mut idx| {
        let mut v = RationalVector::zeros(gens[0].rank());
        for g in gens {
            let k = idx % base;
            idx /= base;
            if k > 0 {
                v = v.add_scaled(&Q::from_integer((k as i64).into()), g);
            }
        }
        v
    })
}

fn kmax_for(count: usize) -> u32 {
    match count {
        0..=7 => 2,
        8..=12 => 1,
        _ => 0,
    }
}

fn vertical_branch(d: &PDivisor, delta: &Boundary, g: &GorensteinData, z: &str, tt: TypeTriple) -> Result<MldWitness> {
    let r = d.rank();
    let dim = r + 1;
    let bound = Q::from_integer((2 * dim as i64 - 1).into());
    let sigma = sigma_z(d, delta, z)?;
    let t = sigma.toric_cone()?;
    let a = toric_gorenstein(&t)?;
    let mut diagnostics = Vec::new();

    // d independent rays: a highest one first, then the lowest ones.
    let mut rays = sigma.rays.clone();
    rays.sort_by(|x, y| y.height().cmp(&x.height()).then_with(|| x.generator.cmp(&y.generator)));
    let n1 = rays[0].generator.clone();
    let mut rest: Vec<_> = rays[1..].to_vec();
    rest.sort_by(|x, y| x.height().cmp(&y.height()).then_with(|| x.generator.cmp(&y.generator)));
    let mut chosen = vec![n1.clone()];
    for ray in &rest {
        let mut trial = chosen.clone();
        trial.push(ray.generator.clone());
        if rank(&trial) == trial.len() {
            chosen = trial;
        }
        if chosen.len() == dim {
            break;
        }
    }
    if chosen.len() < dim {
        return Err(Error::Certificate(format!(
            "σ_{z} has fewer than {dim} independent rays"
        )));
    }
    let prescribed = chosen[1..]
        .iter()
        .fold(n1.scale(&Q::from_integer((dim as i64).into())), |acc, x| &acc + x);
    let lattice = sigma.lattice.clone();
    let prescribed_prim = lattice.primitive_generator(&prescribed);
    let construction_discrepancy = a.dot(&prescribed_prim);
    if !sigma.cone.is_interior_point(&prescribed) {
        diagnostics.push(format!("combination {prescribed} is not interior to σ_{z}"));
    }

    // Smallest discrepancy among small combinations at positive height.
    let gens: Vec<RationalVector> = sigma.rays.iter().map(|x| x.generator.clone()).collect();
    let mut best: Option<(Q, RationalVector)> = None;
    let consider = |x: RationalVector, best: &mut Option<(Q, RationalVector)>| {
        if !x[r].is_positive() || !sigma.cone.is_interior_point(&x) {
            return;
        }
        let p = lattice.primitive_generator(&x);
        let ap = a.dot(&p);
        if best.as_ref().is_none_or(|(b, bp)| ap < *b || (ap == *b && p < *bp)) {
            *best = Some((ap, p));
        }
    };
    consider(prescribed.clone(), &mut best);
    for x in small_combinations(&gens, kmax_for(gens.len())) {
        consider(x, &mut best);
    }
    let (disc_tor, p) =
        best.ok_or_else(|| Error::Certificate(format!("no interior ray of σ_{z} at positive height")))?;
    let w = RationalVector::new(p.coords()[..r].to_vec()).scale(&(Q::one() / &p[r]));

    let vc = vertical_component(d, delta, z, &w)?;
    let (direct, _) = toric_crosscheck(d, delta, z, &w)?;
    let spec = DivisorSpec::Vertical {
        point: z.to_string(),
        w: w.clone(),
    };
    let direct_g = log_discrepancy(g, d, delta, &spec)?;
    // The lattice point over (w, 1) is μ(w)(w, 1), a multiple of p.
    let mult = Q::from_integer(vertex_multiplicity(&w)) / &p[r];
    if direct != direct_g || direct != &mult * &disc_tor {
        diagnostics.push(format!(
            "discrepancy mismatch: X gives {}, fibre gives {}",
            fmt_q(&direct),
            fmt_q(&(&mult * &disc_tor))
        ));
    }
    let ample = fdivisor_vertical(d, z, &w).and_then(|f| ample_certificate(&f, &spec)?.verify(&f));
    let ample = match ample {
        Ok(s) => Some(s),
        Err(e) => {
            diagnostics.push(format!("ampleness certificate failed: {e}"));
            None
        }
    };
    if !vc.is_kollar {
        diagnostics.push(format!(
            "Σ_(y≠{z}) b = {} ≥ 1: not a Kollár component",
            fmt_q(&vc.rest_b)
        ));
    }
    let certified = vc.is_kollar && direct <= bound && ample.is_some() && diagnostics.is_empty();
    Ok(MldWitness {
        branch: Branch::Vertical,
        type_triple: tt,
        z: Some(z.to_string()),
        spec,
        discrepancy: direct,
        bound,
        certified,
        construction_discrepancy,
        m_rays: Vec::new(),
        ample,
        diagnostics,
    })
}

/// Finishes a horizontal witness on the ray through `n`.
#[allow(clippy::too_many_arguments)]
fn horizontal_result(
    d: &PDivisor,
    delta: &Boundary,
    branch: Branch,
    tt: TypeTriple,
    n: &RationalVector,
    bound: Q,
    construction_discrepancy: Q,
    m_rays: Vec<MRay>,
    mut diagnostics: Vec<String>,
) -> Result<MldWitness> {
    let hc = horizontal_component(d, delta, n)?;
    let spec = DivisorSpec::Horizontal(hc.ray.clone());
    let ample = match fdivisor_horizontal(d, &hc.ray).and_then(|f| ample_certificate(&f, &spec)?.verify(&f)) {
        Ok(s) => Some(s),
        Err(e) => {
            diagnostics.push(format!("ampleness certificate failed: {e}"));
            None
        }
    };
    if hc.discrepancy > bound {
        diagnostics.push(format!(
            "discrepancy {} exceeds the bound {}",
            fmt_q(&hc.discrepancy),
            fmt_q(&bound)
        ));
    }
    let certified = hc.is_kollar && hc.discrepancy <= bound && ample.is_some();
    Ok(MldWitness {
        branch,
        type_triple: tt,
        z: None,
        spec,
        discrepancy: hc.discrepancy,
        bound,
        certified,
        construction_discrepancy,
        m_rays,
        ample,
        diagnostics,
    })
}

fn horizontal_discrepancy(g: &GorensteinData, d: &PDivisor, delta: &Boundary, n: &RationalVector) -> Result<Q> {
    log_discrepancy(g, d, delta, &DivisorSpec::Horizontal(n.clone()))
}

fn horizontal_branch(
    d: &PDivisor,
    delta: &Boundary,
    g: &GorensteinData,
    eps: &Q,
    tt: TypeTriple,
) -> Result<MldWitness> {
    let bound = Q::from_integer(2.into()) / eps;
    let lat = d.lattice();
    // b-maximizing vertices per label; ties give several candidate sums.
    let mut choices: Vec<Vec<RationalVector>> = Vec::new();
    for (y, p) in d.coefficients() {
        let bs: Vec<(Q, &RationalVector)> = p
            .vertices()
            .iter()
            .map(|v| (vertex_b(v, &delta.vertical_coefficient(y, v)), v))
            .collect();
        let max = bs.iter().map(|(b, _)| b.clone()).max().expect("nonempty");
        choices.push(
            bs.into_iter()
                .filter(|(b, _)| *b == max)
                .map(|(_, v)| v.clone())
                .collect(),
        );
    }
    let total: usize = choices.iter().map(Vec::len).product();
    let mut sums = BTreeSet::new();
    for mut idx in 0..total {
        let mut s = RationalVector::zeros(d.rank());
        for c in &choices {
            s = &s + &c[idx % c.len()];
            idx /= c.len();
        }
        sums.insert(s);
    }
    let mut diagnostics = Vec::new();
    let mut best: Option<(Q, RationalVector)> = None;
    let mut construction: Option<Q> = None;
    for s in &sums {
        if s.is_zero() || !d.tail().contains(s) {
            continue;
        }
        let n = lat.primitive_generator(s);
        let a = horizontal_discrepancy(g, d, delta, &n)?;
        construction = Some(construction.map_or(a.clone(), |c: Q| c.min(a.clone())));
        if d.tail().is_interior_point(&n) && best.as_ref().is_none_or(|(b, _)| a < *b) {
            best = Some((a, n));
        }
    }
    let construction_discrepancy = construction.clone().unwrap_or_else(Q::zero);
    if best.is_none() {
        // Interiority is not guaranteed here; search nearby rays.
        diagnostics.push(format!(
            "no ray through a sum of b-maximizing vertices is interior to the tail ({} candidates)",
            sums.len()
        ));
        let mut gens: Vec<RationalVector> = sums
            .iter()
            .filter(|s| !s.is_zero())
            .map(|s| lat.primitive_generator(s))
            .collect();
        gens.extend(d.tail().rays().iter().cloned());
        for x in small_combinations(&gens, kmax_for(gens.len())) {
            if !d.tail().is_interior_point(&x) {
                continue;
            }
            let n = lat.primitive_generator(&x);
            let a = horizontal_discrepancy(g, d, delta, &n)?;
            if best.as_ref().is_none_or(|(b, bn)| a < *b || (a == *b && n < *bn)) {
                best = Some((a, n));
            }
        }
        if let Some((a, n)) = &best {
            diagnostics.push(format!("fallback interior ray {n} with discrepancy {}", fmt_q(a)));
        }
    }
    let (_, n) = best.ok_or_else(|| Error::Certificate("no interior ray found for the horizontal branch".into()))?;
    horizontal_result(
        d,
        delta,
        Branch::Horizontal,
        tt,
        &n,
        bound,
        construction_discrepancy,
        Vec::new(),
        diagnostics,
    )
}

fn family_of(d: &PDivisor, n: &RationalVector) -> Vec<VertexFamily> {
    d.vertex_families(Some(n)).collect()
}

fn m_construction(d: &PDivisor, delta: &Boundary, g: &GorensteinData, tt: TypeTriple) -> Result<MldWitness> {
    let r = d.rank();
    let bound = Q::from_integer((156 * r as i64).into());
    let lat = d.lattice();
    let [_, _, q] = tt.as_triple().expect("typed");
    let z = d
        .labels()
        .find(|y| d.multiplicity_over(y).to_u64() == Some(q))
        .cloned()
        .ok_or_else(|| Error::Precondition("no point of maximal multiplicity".into()))?;
    let tail: &Cone = d.tail();
    let mut diagnostics = Vec::new();

    let mut r1: Vec<RationalVector> = Vec::new();
    for ray in tail.rays() {
        let mut trial = r1.clone();
        trial.push(ray.clone());
        if rank(&trial) == trial.len() {
            r1 = trial;
        }
        if r1.len() == r {
            break;
        }
    }
    let distinguished = d
        .vertex_families(None)
        .find(|f| f.family_type() == tt)
        .ok_or_else(|| Error::Certificate(format!("no vertex family of type {tt}")))?;
    let t_z = distinguished.vertex(&z).expect("stored label").clone();
    let t_rest = distinguished
        .choice
        .iter()
        .filter(|(y, _)| **y != z)
        .fold(RationalVector::zeros(r), |acc, (_, v)| &acc + v);
    let n_tau = lat.primitive_generator(&(&t_z + &t_rest));

    let mut m: Vec<MRay> = Vec::new();
    let disc = |n: &RationalVector| horizontal_discrepancy(g, d, delta, &lat.primitive_generator(n));
    for rho in &r1 {
        let n = lat.primitive_generator(rho);
        if !d.ray_meets_degree(&n) {
            m.push(MRay {
                set: MSet::M1,
                discrepancy: disc(&n)?,
                point: n,
                note: "tail ray disjoint from deg".into(),
            });
            continue;
        }
        let fams = family_of(d, &n);
        if fams.is_empty() {
            return Err(Error::Certificate(format!(
                "ray {n} meets deg but no vertex family sums onto it"
            )));
        }
        if let Some(f) = fams
            .iter()
            .find(|f| matches!(f.family_type(), TypeTriple::Typed([2, p, _]) if p >= 2))
        {
            m.push(MRay {
                set: MSet::M2,
                discrepancy: disc(&n)?,
                point: n,
                note: format!("family of type {}", f.family_type()),
            });
            continue;
        }
        let vz_mu = |f: &VertexFamily| f.vertex(&z).map_or(1.into(), vertex_multiplicity);
        if let Some(f) = fams.iter().find(|f| vz_mu(f) == 1.into()) {
            m.push(MRay {
                set: MSet::M3,
                discrepancy: disc(&n)?,
                point: n,
                note: format!("family of type {} with a lattice vertex at {z}", f.family_type()),
            });
            continue;
        }
        let f = &fams[0];
        let v_z = f.vertex(&z).expect("stored label").clone();
        let v_rest = f
            .choice
            .iter()
            .filter(|(y, _)| **y != z)
            .fold(RationalVector::zeros(r), |acc, (_, v)| &acc + v);
        let s1 = &v_z + &t_rest;
        if s1.is_zero() {
            return Err(Error::Certificate("swapped family ρ₁ sums to zero".into()));
        }
        let n1 = lat.primitive_generator(&s1);
        m.push(MRay {
            set: MSet::M4,
            discrepancy: disc(&n1)?,
            point: n1,
            note: format!("ρ₁ for ray {n}: v_{z} with the distinguished family elsewhere"),
        });
        let s2 = &t_z + &v_rest;
        if s2.is_zero() {
            return Err(Error::Certificate("swapped family ρ₂ sums to zero".into()));
        }
        let n2 = lat.primitive_generator(&s2);
        let (point, note) = if n2.same_ray(&n_tau) {
            (n_tau.clone(), format!("ρ₂′ for ray {n}: ρ₂ coincides with τ"))
        } else {
            let c = combine_rays(&n_tau, &n2, &vertex_multiplicity(&t_z), &ell_of(&t_rest, &v_rest))?;
            let note = format!(
                "ρ₂′ for ray {n}: {}·n_τ + {}·{n2}",
                fmt_q(&c.lambda1),
                fmt_q(&c.lambda2)
            );
            (c.point, note)
        };
        m.push(MRay {
            set: MSet::M4,
            discrepancy: disc(&point)?,
            point,
            note,
        });
    }

    let mut common: Option<BTreeSet<RationalVector>> = None;
    for ray in &m {
        let f = tail.face_sets(&ray.point)?;
        common = Some(match common {
            None => f,
            Some(c) => c.intersection(&f).cloned().collect(),
        });
    }
    let common = common.unwrap_or_default();
    let eta = m.iter().fold(RationalVector::zeros(r), |acc, x| &acc + &x.point);
    if !common.is_empty() {
        let fs: Vec<String> = common.iter().map(|f| f.to_string()).collect();
        diagnostics.push(format!("𝐅-intersection is not empty: facets {}", fs.join(", ")));
    }
    if !tail.is_interior_point(&eta) {
        return Err(Error::Certificate(format!("η = {eta} is not interior to the tail")));
    }
    let construction_discrepancy = disc(&eta)?;
    let sum_bound: Q = m.iter().fold(Q::zero(), |acc, x| acc + &x.discrepancy);
    if construction_discrepancy > sum_bound {
        diagnostics.push(format!(
            "a(η) = {} exceeds Σ a(n_ρ) = {}",
            fmt_q(&construction_discrepancy),
            fmt_q(&sum_bound)
        ));
    }
    let per_ray = BTreeMap::from([("78", m.iter().all(|x| x.discrepancy <= Q::from_integer(78.into())))]);
    if !per_ray["78"] {
        diagnostics.push("some ray of M has discrepancy above 78".into());
    }
    let empty = common.is_empty();
    let mut w = horizontal_result(
        d,
        delta,
        Branch::MConstruction,
        tt,
        &eta,
        bound,
        construction_discrepancy,
        m,
        diagnostics,
    )?;
    w.z = Some(z);
    w.certified &= empty;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr};
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
    fn even_case_vertical_branch() {
        let w = mld_bound_witness(&even2(), &Boundary::zero(), &q(1)).unwrap();
        assert_eq!(w.branch, Branch::Vertical);
        assert!(w.certified, "{:?}", w.diagnostics);
        assert_eq!(w.discrepancy, q(2));
        assert_eq!(w.bound, q(5));
        assert_eq!(
            w.spec,
            DivisorSpec::Vertical {
                point: "∞".into(),
                w: rv![1, 1]
            }
        );
        assert!(w.construction_discrepancy <= q(5));
    }

    #[test]
    fn type_123_horizontal_branch() {
        // Type (1,2,3) with coefficient 2/3 at a third point: Σ_{y≠z} b ≥ 1.
        let tail = Cone::from_ints(2, &[&[1, 0], &[1, 6]]).unwrap();
        let d = PDivisor::from_vertices(
            tail,
            &[
                ("0", vec![RationalVector::new(vec![qr(1, 2), q(0)])]),
                ("1", vec![RationalVector::new(vec![qr(2, 3), q(0)])]),
                ("2", vec![rv![-1, 0]]),
            ],
        )
        .unwrap();
        let delta = Boundary::new(&d, vec![], vec![("2".into(), rv![-1, 0], qr(2, 3))]).unwrap();
        let w = mld_bound_witness(&d, &delta, &qr(2, 3)).unwrap();
        assert_eq!(w.branch, Branch::Horizontal);
        assert_eq!(w.bound, q(3));
        assert!(w.certified, "{:?}", w.diagnostics);
        assert!(w.discrepancy <= q(3));
    }

    #[test]
    fn type_223_m_construction() {
        let d = PDivisor::from_vertices(
            Cone::from_ints(2, &[&[1, 0], &[1, 3]]).unwrap(),
            &[
                ("0", vec![RationalVector::new(vec![qr(1, 2), q(0)])]),
                ("1", vec![RationalVector::new(vec![qr(1, 2), q(1)])]),
                ("∞", vec![RationalVector::new(vec![qr(-2, 3), q(0)])]),
            ],
        )
        .unwrap();
        let w = mld_bound_witness(&d, &Boundary::zero(), &q(1)).unwrap();
        assert_eq!(w.branch, Branch::MConstruction);
        assert!(w.certified, "{:?}", w.diagnostics);
        assert!(w.discrepancy <= q(312));
        assert!(!w.m_rays.is_empty());
    }
}
