//! The Q-Gorenstein linear system of `(X(D), Δ)` and log discrepancies of
//! torus-invariant divisors over `X`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgeom::linalg::{solve, LinearSolution};
use crate::exactgeom::rational::qserde;
use crate::exactgeom::{fmt_q, RationalVector, Q};
use crate::pdiv::{ser_qmap, vertex_b, vertex_multiplicity, Boundary, Label, PDivisor, TypeTriple, VertexFamily};

/// A torus-invariant prime divisor over `X`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisorSpec {
    /// `D_ρ` for the ray through the given vector.
    Horizontal(RationalVector),
    /// `D_{z,w}` for a point `w` of the coefficient at `z`.
    Vertical { point: Label, w: RationalVector },
}

impl std::fmt::Display for DivisorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DivisorSpec::Horizontal(n) => write!(f, "D_ρ, ρ = ray{n}"),
            DivisorSpec::Vertical { point, w } => write!(f, "D_({point}, {w})"),
        }
    }
}

/// Solution `(u, {a_y})` of the Q-Gorenstein system for a chosen canonical
/// divisor `Σ k_y · y` on P¹.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GorensteinData {
    pub u: RationalVector,
    #[serde(serialize_with = "ser_qmap")]
    pub a: BTreeMap<Label, Q>,
    pub k: BTreeMap<Label, i64>,
}

impl GorensteinData {
    /// `a_y`, which equals `k_y` on labels without a stored coefficient.
    pub fn a_at(&self, y: &str) -> Q {
        self.a
            .get(y)
            .cloned()
            .unwrap_or_else(|| Q::from_integer(self.k_at(y).into()))
    }

    pub fn k_at(&self, y: &str) -> i64 {
        self.k.get(y).copied().unwrap_or(0)
    }
}

/// Default canonical divisor: `−1` at each of the first two labels, with
/// fresh labels when fewer than two exist.
pub fn default_canonical(d: &PDivisor) -> BTreeMap<Label, i64> {
    let mut labels: Vec<Label> = d.labels().take(2).cloned().collect();
    for fresh in ["__k1", "__k2"] {
        if labels.len() < 2 {
            labels.push(fresh.to_string());
        }
    }
    labels.into_iter().map(|y| (y, -1)).collect()
}

pub fn solve_gorenstein(d: &PDivisor, delta: &Boundary) -> Result<GorensteinData> {
    solve_gorenstein_with(d, delta, &default_canonical(d))
}

struct Equation {
    coeffs: RationalVector,
    rhs: Q,
    text: String,
}

/// Solves the system with an explicit canonical divisor `k` (`Σ k_y = −2`).
pub fn solve_gorenstein_with(d: &PDivisor, delta: &Boundary, k: &BTreeMap<Label, i64>) -> Result<GorensteinData> {
    let cert = d.is_proper();
    if !cert.proper {
        return Err(Error::Precondition(format!("p-divisor is not proper: {}", cert.reason)));
    }
    if k.values().sum::<i64>() != -2 {
        return Err(Error::Invalid("canonical divisor on P¹ must have degree −2".into()));
    }
    let r = d.rank();
    let labels: Vec<Label> = d
        .labels()
        .cloned()
        .chain(k.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let nvars = r + labels.len();
    let a_index = |y: &str| r + labels.iter().position(|l| l == y).expect("known label");
    let k_of = |y: &str| Q::from_integer(k.get(y).copied().unwrap_or(0).into());

    let mut eqs: Vec<Equation> = Vec::new();
    for y in &labels {
        match d.coefficients().get(y) {
            Some(p) => {
                for v in p.vertices() {
                    let mut c = v.clone().into_coords();
                    c.resize(nvars, Q::zero());
                    c[a_index(y)] = Q::one();
                    let rhs = k_of(y) + vertex_b(v, &delta.vertical_coefficient(y, v));
                    eqs.push(Equation {
                        coeffs: RationalVector::new(c),
                        text: format!("vertex {v} over {y}: ⟨u,{v}⟩ + a[{y}] = {}", fmt_q(&rhs)),
                        rhs,
                    });
                }
            }
            None => {
                let mut c = vec![Q::zero(); nvars];
                c[a_index(y)] = Q::one();
                let rhs = k_of(y);
                eqs.push(Equation {
                    coeffs: RationalVector::new(c),
                    text: format!("trivial coefficient over {y}: a[{y}] = {}", fmt_q(&rhs)),
                    rhs,
                });
            }
        }
    }
    for n in d.free_rays() {
        let mut c = n.clone().into_coords();
        c.resize(nvars, Q::zero());
        let rhs = delta.ray_coefficient(&n) - Q::one();
        eqs.push(Equation {
            coeffs: RationalVector::new(c),
            text: format!("ray {n}: ⟨u,{n}⟩ = {}", fmt_q(&rhs)),
            rhs,
        });
    }
    let mut c = vec![Q::zero(); nvars];
    for y in &labels {
        c[a_index(y)] = Q::one();
    }
    eqs.push(Equation {
        coeffs: RationalVector::new(c),
        rhs: Q::zero(),
        text: "degree zero: Σ a[y] = 0".into(),
    });

    let rows: Vec<RationalVector> = eqs.iter().map(|e| e.coeffs.clone()).collect();
    let rhs: Vec<Q> = eqs.iter().map(|e| e.rhs.clone()).collect();
    match solve(&rows, &rhs, nvars) {
        LinearSolution::Unique(x) => {
            let u = RationalVector::new(x.coords()[..r].to_vec());
            let a = labels.iter().map(|y| (y.clone(), x[a_index(y)].clone())).collect();
            Ok(GorensteinData { u, a, k: k.clone() })
        }
        LinearSolution::Inconsistent { rows } => Err(Error::NotQGorenstein {
            equations: rows.iter().map(|&i| eqs[i].text.clone()).collect(),
        }),
        LinearSolution::Underdetermined { free, .. } => {
            let names: Vec<String> = free
                .iter()
                .map(|&j| {
                    if j < r {
                        format!("u[{j}]")
                    } else {
                        format!("a[{}]", labels[j - r])
                    }
                })
                .collect();
            let mut equations = vec![format!("free unknowns: {}", names.join(", "))];
            equations.extend(eqs.iter().map(|e| e.text.clone()));
            Err(Error::AmbiguousGorenstein { equations })
        }
    }
}

/// Log discrepancy of a horizontal or vertical divisor over `X`.
pub fn log_discrepancy(g: &GorensteinData, d: &PDivisor, _delta: &Boundary, spec: &DivisorSpec) -> Result<Q> {
    match spec {
        DivisorSpec::Horizontal(n) => {
            n.check_rank(d.rank())?;
            if n.is_zero() || !d.tail().contains(n) {
                return Err(Error::Precondition(format!("{n} does not span a ray of the tail cone")));
            }
            let np = d.lattice().primitive_generator(n);
            Ok(-g.u.dot(&np))
        }
        DivisorSpec::Vertical { point, w } => {
            w.check_rank(d.rank())?;
            if !d.coefficient(point).contains(w) {
                return Err(Error::Precondition(format!(
                    "{w} is not in the coefficient at {point:?}"
                )));
            }
            let mu = Q::from_integer(vertex_multiplicity(w));
            let kz = Q::from_integer(g.k_at(point).into());
            Ok(mu * (-g.u.dot(w) - g.a_at(point) + kz + Q::one()))
        }
    }
}

/// Both sides of `a(D_ρ) = λ₁a(D_{ρ₁}) + λ₂a(D_{ρ₂})` for the ray of
/// `n = λ₁n₁ + λ₂n₂`. When `n` is `m` times a primitive vector the left side
/// is `m·a(D_ρ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearityCheck {
    #[serde(with = "qserde")]
    pub lhs: Q,
    #[serde(with = "qserde")]
    pub rhs: Q,
    #[serde(with = "qserde")]
    pub multiple: Q,
}

pub fn horizontal_linearity_check(
    g: &GorensteinData,
    d: &PDivisor,
    delta: &Boundary,
    rho1: &RationalVector,
    rho2: &RationalVector,
    lambda1: &Q,
    lambda2: &Q,
) -> Result<LinearityCheck> {
    let lat = d.lattice();
    let n1 = lat.primitive_generator(rho1);
    let n2 = lat.primitive_generator(rho2);
    let n = n1.scale(lambda1).add_scaled(lambda2, &n2);
    if n.is_zero() || !d.tail().contains(&n) {
        return Err(Error::Precondition(format!("combination {n} leaves the tail cone")));
    }
    let np = lat.primitive_generator(&n);
    let i = (0..n.rank()).find(|&i| !np[i].is_zero()).expect("nonzero");
    let multiple = &n[i] / &np[i];
    let a = |v: &RationalVector| log_discrepancy(g, d, delta, &DivisorSpec::Horizontal(v.clone()));
    let lhs = &multiple * a(&np)?;
    let rhs = lambda1 * a(&n1)? + lambda2 * a(&n2)?;
    if lhs != rhs {
        return Err(Error::Certificate(format!(
            "linearity fails on ray {np}: {} ≠ {}",
            fmt_q(&lhs),
            fmt_q(&rhs)
        )));
    }
    Ok(LinearityCheck { lhs, rhs, multiple })
}

/// Discrepancy of the ray through a family sum, with the bounds for its type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyDiscrepancy {
    pub ray: RationalVector,
    #[serde(with = "qserde")]
    pub lambda: Q,
    #[serde(with = "qserde")]
    pub discrepancy: Q,
    pub family_type: TypeTriple,
    /// `(bound, satisfied)` for type `(2,p,q)`, `p,q ≥ 2`: `a ≤ 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_2pq: Option<(String, bool)>,
    /// `(bound, satisfied)` for type `(1,p,q)`: `a ≤ (p+q)/gcd(p,q)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_1pq: Option<(String, bool)>,
}

pub fn family_discrepancy(d: &PDivisor, delta: &Boundary, fam: &VertexFamily) -> Result<FamilyDiscrepancy> {
    let s = fam.sum(d.rank());
    if s.is_zero() {
        return Err(Error::Precondition("family sums to zero; it spans no ray".into()));
    }
    let n = d.lattice().primitive_generator(&s);
    let i = (0..s.rank()).find(|&i| !s[i].is_zero()).expect("nonzero");
    let lambda = &n[i] / &s[i];
    let total_b = fam.choice.iter().fold(Q::zero(), |acc, (y, v)| {
        acc + vertex_b(v, &delta.vertical_coefficient(y, v))
    });
    let discrepancy = &lambda * (Q::from_integer(2.into()) - total_b);

    let g = solve_gorenstein(d, delta)?;
    let direct = log_discrepancy(&g, d, delta, &DivisorSpec::Horizontal(n.clone()))?;
    if direct != discrepancy {
        return Err(Error::Certificate(format!(
            "family formula gives {} but the Gorenstein data give {} on ray {n}",
            fmt_q(&discrepancy),
            fmt_q(&direct)
        )));
    }

    let family_type = fam.family_type();
    let (mut bound_2pq, mut bound_1pq) = (None, None);
    if let TypeTriple::Typed([p0, p, q]) = family_type {
        if p0 == 2 {
            bound_2pq = Some(("2".to_string(), discrepancy <= Q::from_integer(2.into())));
        } else if p0 == 1 {
            let g = BigInt::from(p).gcd(&BigInt::from(q));
            let b = Q::new(BigInt::from(p + q), g);
            bound_1pq = Some((fmt_q(&b), discrepancy <= b));
        }
    }
    Ok(FamilyDiscrepancy {
        ray: n,
        lambda,
        discrepancy,
        family_type,
        bound_2pq,
        bound_1pq,
    })
}

/// Every prime divisor on `X` with its log discrepancy: vertices of all stored
/// coefficients and the free tail rays.
pub fn prime_divisors(d: &PDivisor) -> Vec<DivisorSpec> {
    let mut out: Vec<DivisorSpec> = d
        .coefficients()
        .iter()
        .flat_map(|(y, p)| {
            p.vertices().iter().map(move |v| DivisorSpec::Vertical {
                point: y.clone(),
                w: v.clone(),
            })
        })
        .collect();
    out.extend(d.free_rays().into_iter().map(DivisorSpec::Horizontal));
    out
}

/// Boundary coefficient attached to a prime divisor on `X`.
pub fn boundary_coefficient(delta: &Boundary, spec: &DivisorSpec) -> Q {
    match spec {
        DivisorSpec::Horizontal(n) => delta.ray_coefficient(n),
        DivisorSpec::Vertical { point, w } => delta.vertical_coefficient(point, w),
    }
}

/// True if all listed discrepancies are positive.
pub fn all_positive(values: &[Q]) -> bool {
    values.iter().all(|v| v.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr, Cone};
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
    fn even_case_solution() {
        let d = even2();
        let g = solve_gorenstein(&d, &Boundary::zero()).unwrap();
        assert_eq!(g.u, rv![-3, 0]);
        assert_eq!(g.a["0"], q(-1));
        assert_eq!(g.a["1"], q(-1));
        assert_eq!(g.a["∞"], q(2));
    }

    #[test]
    fn even_case_discrepancies() {
        let d = even2();
        let z = Boundary::zero();
        let g = solve_gorenstein(&d, &z).unwrap();
        let half = RationalVector::new(vec![qr(1, 2), q(0)]);
        let v = DivisorSpec::Vertical {
            point: "∞".into(),
            w: half,
        };
        assert_eq!(log_discrepancy(&g, &d, &z, &v).unwrap(), q(1));
        let h = DivisorSpec::Horizontal(rv![1, 2]);
        assert_eq!(log_discrepancy(&g, &d, &z, &h).unwrap(), q(3));
        let v = DivisorSpec::Vertical {
            point: "∞".into(),
            w: rv![1, 1],
        };
        assert_eq!(log_discrepancy(&g, &d, &z, &v).unwrap(), q(2));
    }

    #[test]
    fn linearity_on_even_case() {
        let d = even2();
        let z = Boundary::zero();
        let g = solve_gorenstein(&d, &z).unwrap();
        let c = horizontal_linearity_check(&g, &d, &z, &rv![1, 0], &rv![1, 4], &q(1), &q(1)).unwrap();
        assert_eq!((c.lhs, c.rhs, c.multiple), (q(6), q(6), q(2)));
        let c = horizontal_linearity_check(&g, &d, &z, &rv![1, 0], &rv![1, 4], &q(1), &q(0)).unwrap();
        assert_eq!(c.lhs, q(3));
    }

    #[test]
    fn family_formula() {
        let d = even2();
        let z = Boundary::zero();
        let fams: Vec<_> = d.vertex_families(None).collect();
        let base = fams
            .iter()
            .find(|f| f.sum(2) == RationalVector::new(vec![qr(1, 2), q(0)]))
            .unwrap();
        let r = family_discrepancy(&d, &z, base).unwrap();
        assert_eq!((r.lambda, r.discrepancy), (q(2), q(3)));
        let one = fams
            .iter()
            .find(|f| f.sum(2) == RationalVector::new(vec![qr(1, 2), q(1)]))
            .unwrap();
        let r = family_discrepancy(&d, &z, one).unwrap();
        assert_eq!(r.discrepancy, q(3));
        assert_eq!(r.bound_1pq, Some(("3".to_string(), true)));
    }

    #[test]
    fn smooth_toric_trivial_case() {
        // A single lattice-point coefficient gives the smooth toric A² x A¹-type
        // chart; the trivial p-divisor itself is not proper.
        let orth = Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let trivial = PDivisor::new(orth.clone(), Default::default()).unwrap();
        assert!(matches!(
            solve_gorenstein(&trivial, &Boundary::zero()),
            Err(Error::Precondition(_))
        ));
        let d = PDivisor::from_vertices(orth, &[("0", vec![rv![1, 1]])]).unwrap();
        let g = solve_gorenstein(&d, &Boundary::zero()).unwrap();
        assert_eq!(g.a["0"], q(0) - g.u.dot(&rv![1, 1]) - q(1));
    }

    #[test]
    fn incompatible_slopes_are_not_gorenstein() {
        // The segment over 0 forces u₁ = 2u₂, the free ray (0,1) forces
        // u₂ = −1; then a₀ + a₁ = 2 contradicts the degree-zero condition.
        let orth = Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let d = PDivisor::from_vertices(orth, &[("0", vec![rv![1, 0], rv![0, 2]]), ("1", vec![rv![1, 0]])]).unwrap();
        match solve_gorenstein(&d, &Boundary::zero()) {
            Err(Error::NotQGorenstein { equations }) => assert!(!equations.is_empty()),
            other => panic!("expected NotQGorenstein, got {other:?}"),
        }
    }

    #[test]
    fn canonical_support_invariance() {
        let d = even2();
        let z = Boundary::zero();
        let g1 = solve_gorenstein(&d, &z).unwrap();
        let k2: BTreeMap<Label, i64> = [("∞".to_string(), -2)].into_iter().collect();
        let g2 = solve_gorenstein_with(&d, &z, &k2).unwrap();
        assert_ne!(g1.a, g2.a);
        for spec in prime_divisors(&d).into_iter().chain([
            DivisorSpec::Horizontal(rv![1, 2]),
            DivisorSpec::Vertical {
                point: "0".into(),
                w: rv![1, 1],
            },
        ]) {
            assert_eq!(
                log_discrepancy(&g1, &d, &z, &spec).unwrap(),
                log_discrepancy(&g2, &d, &z, &spec).unwrap()
            );
        }
    }
}
