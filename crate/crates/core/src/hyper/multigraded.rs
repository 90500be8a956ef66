use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::{nvol_weighted, WeightSystem};
use crate::error::{Error, Result};
use crate::exactgeom::linalg::{nullspace, rank, solve, LinearSolution};
use crate::exactgeom::rational::{qserde, to_f64};
use crate::exactgeom::{Cone, RationalVector, Q};

/// A hypersurface `{f = 0} ⊂ C^{n+1}` graded by `M = Z^r`: variable `i` has
/// weight `uᵢ` and `f` is homogeneous of weight `u_f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultigradedHypersurface {
    pub weights: Vec<RationalVector>,
    pub degree: RationalVector,
    /// Exponent vectors of the monomials of `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monomials: Option<Vec<Vec<u32>>>,
}

impl MultigradedHypersurface {
    pub fn new(
        weights: Vec<RationalVector>,
        degree: RationalVector,
        monomials: Option<Vec<Vec<u32>>>,
    ) -> Result<MultigradedHypersurface> {
        let h = MultigradedHypersurface {
            weights,
            degree,
            monomials,
        };
        h.validate()?;
        Ok(h)
    }

    /// Checks ranks and that every monomial of `f` has weight `u_f`.
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() < 2 {
            return Err(Error::Invalid("a hypersurface needs at least two variables".into()));
        }
        let r = self.degree.rank();
        for u in &self.weights {
            u.check_rank(r)?;
            if !u.is_integral() {
                return Err(Error::Invalid(format!("variable weight {u} is not a lattice point")));
            }
        }
        match &self.monomials {
            Some(ms) => {
                if ms.is_empty() {
                    return Err(Error::Invalid("f has no monomials".into()));
                }
                for m in ms {
                    let u = self.monomial_weight(m)?;
                    if u != self.degree {
                        return Err(Error::Invalid(format!(
                            "monomial {m:?} has weight {u}, but f has weight {}",
                            self.degree
                        )));
                    }
                }
            }
            None => {
                if !self.degree.is_integral() {
                    return Err(Error::Invalid(format!(
                        "equation weight {} is not a lattice point",
                        self.degree
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }

    /// Dimension `n` of the hypersurface.
    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn rank(&self) -> usize {
        self.degree.rank()
    }

    pub fn monomial_weight(&self, m: &[u32]) -> Result<RationalVector> {
        if m.len() != self.nvars() {
            return Err(Error::Dimension {
                expected: self.nvars(),
                got: m.len(),
            });
        }
        Ok(m.iter()
            .zip(&self.weights)
            .fold(RationalVector::zeros(self.rank()), |acc, (&e, u)| {
                acc.add_scaled(&Q::from_integer(e.into()), u)
            }))
    }

    /// Weight cone `ω = pos(uᵢ)`.
    pub fn weight_cone(&self) -> Result<Cone> {
        Cone::new(self.rank(), &self.weights)
    }

    /// Reeb cone `σ = ω^∨`.
    pub fn reeb_cone(&self) -> Result<Cone> {
        Ok(self.weight_cone()?.dual())
    }

    /// Log discrepancy direction `Σuᵢ − u_f`.
    pub fn discrepancy_form(&self) -> RationalVector {
        &self
            .weights
            .iter()
            .fold(RationalVector::zeros(self.rank()), |acc, u| &acc + u)
            - &self.degree
    }

    /// Induced weight system `(⟨uᵢ, ξ⟩; ⟨u_f, ξ⟩)`.
    pub fn weights_at(&self, xi: &RationalVector) -> Result<WeightSystem> {
        xi.check_rank(self.rank())?;
        WeightSystem::new(self.weights.iter().map(|u| u.dot(xi)).collect(), self.degree.dot(xi))
    }
}

/// `nvol(ξ) = d(Σw − d)ⁿ/Πw` with `wᵢ = ⟨uᵢ, ξ⟩`, `d = ⟨u_f, ξ⟩`.
pub fn nvol_multigraded(h: &MultigradedHypersurface, xi: &RationalVector) -> Result<Q> {
    xi.check_rank(h.rank())?;
    let sigma = h.reeb_cone()?;
    if !sigma.contains_relint(xi) || h.weights.iter().any(|u| !u.dot(xi).is_positive()) {
        return Err(Error::Precondition(format!(
            "{xi} is not in the relative interior of the Reeb cone"
        )));
    }
    nvol_weighted(&h.weights_at(xi)?)
}

/// Minimizer of the multigraded normalized volume.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultigradedMinimum {
    /// On the slice `⟨Σuᵢ − u_f, ξ⟩ = n`.
    pub xi_star: RationalVector,
    pub weights: WeightSystem,
    #[serde(with = "qserde")]
    pub value: Q,
    /// The rational point satisfies the critical-point equations exactly.
    pub exact: bool,
    pub iterations: usize,
}

/// Minimizes `nvol` over the interior of the Reeb cone by damped Newton steps
/// on `log d − Σ log wᵢ` restricted to the slice, then snaps to a nearby
/// rational point and checks the critical-point equations exactly.
pub fn minimize_multigraded(h: &MultigradedHypersurface) -> Result<MultigradedMinimum> {
    let r = h.rank();
    let omega = h.weight_cone()?;
    if !omega.is_full_dim() || !omega.is_pointed() {
        return Err(Error::Precondition(
            "the weight cone must be pointed and full-dimensional".into(),
        ));
    }
    let sigma = omega.dual();
    let a = h.discrepancy_form();
    let nq = Q::from_integer((h.dim() as i64).into());
    let start = sigma.rays().iter().fold(RationalVector::zeros(r), |acc, x| &acc + x);
    let sa = a.dot(&start);
    if !sa.is_positive() {
        return Err(Error::NotKlt("Σw − d is not positive on the Reeb cone".into()));
    }
    let start = start.scale(&(&nq / sa));

    let uf: Vec<Vec<f64>> = h.weights.iter().map(|u| u.to_f64()).collect();
    let df = h.degree.to_f64();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let phi = |x: &[f64]| -> Option<(f64, Vec<f64>, DMatrix<f64>)> {
        let d = dot(&df, x);
        if d <= 0.0 {
            return None;
        }
        let mut f = d.ln();
        let mut g: Vec<f64> = df.iter().map(|c| c / d).collect();
        let mut hm = DMatrix::from_fn(r, r, |i, j| -df[i] * df[j] / (d * d));
        for u in &uf {
            let w = dot(u, x);
            if w <= 0.0 {
                return None;
            }
            f -= w.ln();
            for i in 0..r {
                g[i] -= u[i] / w;
                for j in 0..r {
                    hm[(i, j)] += u[i] * u[j] / (w * w);
                }
            }
        }
        Some((f, g, hm))
    };

    let tangent = nullspace(std::slice::from_ref(&a), r);
    let p = DMatrix::from_fn(r, tangent.len(), |i, j| to_f64(&tangent[j][i]));
    let mut x = start.to_f64();
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let Some((fv, g, hm)) = phi(&x) else { break };
        let gt = p.transpose() * DVector::from_vec(g.clone());
        if gt.norm() < 1e-14 {
            break;
        }
        let ht = p.transpose() * &hm * &p;
        let step_t = match ht.clone().cholesky() {
            Some(c) => -c.solve(&gt),
            None => -gt.clone(),
        };
        let step = &p * step_t;
        let slope = dot(&g, step.as_slice());
        let mut s = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, di)| xi + s * di).collect();
            if let Some((fc, _, _)) = phi(&cand) {
                if fc <= fv + 1e-4 * s * slope.min(0.0) {
                    x = cand;
                    moved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !moved {
            break;
        }
    }

    let on_slice = |y: RationalVector| {
        let s = a.dot(&y);
        y.scale(&(&nq / s))
    };
    let is_critical = |y: &RationalVector| -> bool {
        let Ok(ws) = h.weights_at(y) else { return false };
        if !ws.degree().is_positive() {
            return false;
        }
        // ∇(log d − Σ log wᵢ) must be parallel to the slice normal.
        let g = h
            .weights
            .iter()
            .fold(h.degree.scale(&(Q::one() / h.degree.dot(y))), |acc, u| {
                acc.add_scaled(&(-Q::one() / u.dot(y)), u)
            });
        rank(&[g, a.clone()]) <= 1
    };
    let inside = |y: &RationalVector| sigma.contains_relint(y) && h.weights.iter().all(|u| u.dot(y).is_positive());
    let mut best = None;
    for bound in [1i64, 2, 3, 4, 6, 8, 12, 16, 24, 32, 64, 128, 256, 1024] {
        let y = RationalVector::new(x.iter().map(|&c| best_rational(c, bound)).collect());
        if a.dot(&y).is_positive() {
            let y = on_slice(y);
            if inside(&y) && is_critical(&y) {
                best = Some((y, true));
                break;
            }
        }
    }
    let (xi_star, exact) = match best {
        Some(b) => b,
        None => {
            let y = on_slice(RationalVector::new(
                x.iter().map(|&c| best_rational(c, 1 << 30)).collect(),
            ));
            if !inside(&y) {
                return Err(Error::Certificate("the numeric minimizer left the Reeb cone".into()));
            }
            (y, false)
        }
    };
    let weights = h.weights_at(&xi_star)?;
    let value = nvol_weighted(&weights)?;
    Ok(MultigradedMinimum {
        xi_star,
        weights,
        value,
        exact,
        iterations,
    })
}

/// Closest rational with denominator at most `max_den` (continued fractions).
fn best_rational(x: f64, max_den: i64) -> Q {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (
            a.saturating_mul(p1).saturating_add(p0),
            a.saturating_mul(q1).saturating_add(q0),
        );
        if q2 > max_den || q2 <= 0 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    if q1 == 0 {
        return Q::from_integer((x.round() as i64).into());
    }
    Q::new(p1.into(), q1.into())
}

/// A nonzero graded piece `T¹(u)` of the hypersurface normal module along the kernel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct T1Degree {
    /// `u = deg(m) − u_f` in `M̂`.
    pub u: RationalVector,
    /// Coordinates of `u` in the kernel basis.
    pub coordinates: RationalVector,
    /// Standard monomials (not divisible by the leading term of `f`) of weight `u_f + u`.
    pub monomials: Vec<Vec<u32>>,
}

/// Degrees `u` in the lattice spanned by `kernel_basis` for which some
/// monomial of weight `u_f + u` of total degree at most `height_cap`
/// survives in `R/(f)`. Since `{f}` is a Gröbner basis of `(f)`, the
/// surviving monomials are those not divisible by the lex-leading term.
pub fn t1_support(
    h: &MultigradedHypersurface,
    kernel_basis: &[RationalVector],
    height_cap: u32,
) -> Result<Vec<T1Degree>> {
    let ms = h
        .monomials
        .as_ref()
        .ok_or_else(|| Error::Precondition("t1_support needs the monomials of f".into()))?;
    let r = h.rank();
    for k in kernel_basis {
        k.check_rank(r)?;
    }
    if rank(kernel_basis) != kernel_basis.len() {
        return Err(Error::Invalid("kernel basis is linearly dependent".into()));
    }
    let lead = ms.iter().max().expect("validated nonempty").clone();
    let cols: Vec<RationalVector> = (0..r)
        .map(|i| RationalVector::new(kernel_basis.iter().map(|k| k[i].clone()).collect()))
        .collect();
    let mut found: BTreeMap<RationalVector, T1Degree> = BTreeMap::new();
    let mut m = vec![0u32; h.nvars()];
    loop {
        if !m.iter().zip(&lead).all(|(a, b)| a >= b) {
            let u = &h.monomial_weight(&m)? - &h.degree;
            let rhs: Vec<Q> = u.coords().to_vec();
            let coords = if kernel_basis.is_empty() {
                u.is_zero().then(|| RationalVector::zeros(0))
            } else {
                match solve(&cols, &rhs, kernel_basis.len()) {
                    LinearSolution::Unique(c) => Some(c),
                    _ => None,
                }
            };
            if let Some(c) = coords.filter(RationalVector::is_integral) {
                found
                    .entry(u.clone())
                    .or_insert_with(|| T1Degree {
                        u,
                        coordinates: c,
                        monomials: Vec::new(),
                    })
                    .monomials
                    .push(m.clone());
            }
        }
        if !next_monomial(&mut m, height_cap) {
            break;
        }
    }
    Ok(found.into_values().collect())
}

/// Steps through all exponent vectors of total degree at most `cap`.
fn next_monomial(m: &mut [u32], cap: u32) -> bool {
    for i in (0..m.len()).rev() {
        m[i] += 1;
        if m.iter().sum::<u32>() <= cap {
            return true;
        }
        m[i] = 0;
    }
    false
}

impl std::fmt::Display for T1Degree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ms: Vec<String> = self.monomials.iter().map(|m| format!("{m:?}")).collect();
        write!(f, "{} [{}]", self.u, ms.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr};
    use crate::rv;

    /// `xy + z²` with variables graded by the dual of cone{(0,0,1),(0,2,1),(1,0,0)}.
    fn quadric() -> MultigradedHypersurface {
        MultigradedHypersurface::new(
            vec![rv![0, 1, 0], rv![0, -1, 2], rv![0, 0, 1], rv![1, 0, 0]],
            rv![0, 0, 2],
            Some(vec![vec![1, 1, 0, 0], vec![0, 0, 2, 0]]),
        )
        .unwrap()
    }

    #[test]
    fn quadric_volume() {
        let h = quadric();
        let ws = h.weights_at(&rv![1, 2, 2]).unwrap();
        assert_eq!(ws.to_string(), "(1,2,2,2;4)");
        assert_eq!(nvol_multigraded(&h, &rv![1, 2, 2]).unwrap(), qr(27, 2));
        assert!(nvol_multigraded(&h, &rv![0, 2, 2]).is_err());
    }

    #[test]
    fn one_dimensional_grading() {
        let h = MultigradedHypersurface::new(vec![rv![1], rv![1], rv![2], rv![3]], rv![4], None).unwrap();
        assert_eq!(nvol_multigraded(&h, &rv![1]).unwrap(), q(18));
    }

    #[test]
    fn quadric_minimizer() {
        let m = minimize_multigraded(&quadric()).unwrap();
        assert!(m.exact);
        assert_eq!(m.xi_star, rv![1, 2, 2]);
        assert_eq!(m.value, qr(27, 2));
    }

    #[test]
    fn t1_of_the_running_family() {
        let h = quadric();
        let t = t1_support(&h, &[rv![4, 0, -2]], 6).unwrap();
        let us: Vec<_> = t.iter().map(|x| x.u.clone()).collect();
        assert_eq!(us, vec![rv![0, 0, 0], rv![4, 0, -2]]);
        assert_eq!(t[0].monomials, vec![vec![0, 0, 2, 0]]);
        assert_eq!(t[1].monomials, vec![vec![0, 0, 0, 4]]);
        let short = t1_support(&h, &[rv![4, 0, -2]], 3).unwrap();
        assert_eq!(short.len(), 1);
    }

    #[test]
    fn full_rank_quadric_has_trivial_support() {
        // xy + zw with a rank-3 grading: the kernel is zero, only u = 0.
        let h = MultigradedHypersurface::new(
            vec![rv![1, 0, 0], rv![-1, 0, 1], rv![0, 1, 0], rv![0, -1, 1]],
            rv![0, 0, 1],
            Some(vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]),
        )
        .unwrap();
        let t = t1_support(&h, &[], 4).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0].u.is_zero());
        assert_eq!(t[0].monomials, vec![vec![0, 0, 1, 1]]);
    }

    #[test]
    fn monomial_enumeration_is_complete() {
        let mut m = vec![0u32; 3];
        let mut count = 1;
        while next_monomial(&mut m, 3) {
            count += 1;
        }
        assert_eq!(count, 20);
    }
}
