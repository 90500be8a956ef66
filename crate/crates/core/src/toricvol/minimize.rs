use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{toric_gorenstein, ToricCone, VolumeFunction};
use crate::error::{Error, Result};
use crate::exactgeom::linalg::nullspace;
use crate::exactgeom::rational::{from_f64, pow, qserde};
use crate::exactgeom::{RationalVector, Q};

/// Result of normalized-volume minimization.
///
/// `xi_star` lies on the slice `a(ξ) = n`; the minimum of `nvol` is enclosed
/// in `[lower, upper]` (equal when `simplicial_exact`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimizeResult {
    pub xi_star: RationalVector,
    #[serde(with = "qserde")]
    pub lower: Q,
    #[serde(with = "qserde")]
    pub upper: Q,
    pub simplicial_exact: bool,
    pub within_tolerance: bool,
    pub iterations: usize,
}

impl MinimizeResult {
    pub fn width(&self) -> Q {
        &self.upper - &self.lower
    }

    /// Unit direction of `xi_star` in floating point.
    pub fn direction(&self) -> Vec<f64> {
        normalize(&self.xi_star.to_f64())
    }
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Discrepancy vector with the klt check (all ray discrepancies positive).
fn klt_discrepancy(t: &ToricCone) -> Result<RationalVector> {
    let a = toric_gorenstein(t)?;
    for g in t.ray_generators() {
        if !a.dot(&g).is_positive() {
            return Err(Error::NotKlt(format!("ray {g} has nonpositive log discrepancy")));
        }
    }
    Ok(a)
}

/// Minimizes `nvol` over the interior of the cone. Simplicial cones use the
/// closed form `ξ* = Σ n_ρ / (1 − c_ρ)`; others use [`minimize_nvol_numeric`].
pub fn minimize_nvol(t: &ToricCone, tolerance: &Q) -> Result<MinimizeResult> {
    let a = klt_discrepancy(t)?;
    if !t.is_simplicial() {
        return minimize_nvol_numeric(t, tolerance);
    }
    // In ray coordinates ξ = Σ t_ρ n_ρ the volume is C/Π t_ρ and
    // a(ξ) = Σ t_ρ (1 − c_ρ); AM–GM on t_ρ(1 − c_ρ) gives the minimizer.
    let n = t.rank();
    let xi = t.ray_generators().iter().fold(RationalVector::zeros(n), |acc, g| {
        let w = a.dot(g);
        acc.add_scaled(&(Q::one() / w), g)
    });
    let nq = Q::from_integer((n as i64).into());
    let xi = xi.scale(&(&nq / a.dot(&xi)));
    let f = VolumeFunction::new(t)?;
    let value = pow(&nq, n as u32) * f.eval(&xi)?;
    Ok(MinimizeResult {
        xi_star: xi,
        lower: value.clone(),
        upper: value,
        simplicial_exact: true,
        within_tolerance: true,
        iterations: 0,
    })
}

/// Convex minimization of `vol` on the slice `{a(ξ) = n}` by damped Newton
/// steps with step halving. The enclosure is certified exactly: the upper end
/// is `nⁿ vol(ξ)` at a rational iterate, the lower end is the linearization of
/// the convex function `vol` minimized over the slice polytope's vertices.
pub fn minimize_nvol_numeric(t: &ToricCone, tolerance: &Q) -> Result<MinimizeResult> {
    let a = klt_discrepancy(t)?;
    let n = t.rank();
    let nq = Q::from_integer((n as i64).into());
    let scale = pow(&nq, n as u32);
    let f = VolumeFunction::new(t)?;

    let verts: Vec<RationalVector> = t.ray_generators().iter().map(|g| g.scale(&(&nq / a.dot(g)))).collect();
    let mut x = verts
        .iter()
        .fold(RationalVector::zeros(n), |acc, v| &acc + v)
        .scale(&(Q::one() / Q::from_integer((verts.len() as i64).into())));

    let tangent = nullspace(std::slice::from_ref(&a), n);
    let p = DMatrix::from_fn(n, n - 1, |i, j| crate::exactgeom::rational::to_f64(&tangent[j][i]));
    let a_norm2 = a.dot(&a);
    let project = |y: &RationalVector| -> RationalVector {
        let shift = (&nq - a.dot(y)) / &a_norm2;
        y.add_scaled(&shift, &a)
    };

    // Phase 1: floating-point damped Newton from the vertex barycenter.
    let mut xf = x.to_f64();
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let Some((fv, g, h)) = f.eval_f64(&xf) else { break };
        let Some(step) = newton_step(&p, &g, &h) else { break };
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        if slope.abs() <= 1e-30 * fv.abs().max(1e-300) {
            break;
        }
        let mut s = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = xf.iter().zip(&step).map(|(x, d)| x + s * d).collect();
            if let Some((fc, _, _)) = f.eval_f64(&cand) {
                if fc <= fv + 1e-4 * s * slope {
                    xf = cand;
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
    if let Some(xr) = xf.iter().map(|&v| from_f64(v)).collect::<Option<Vec<Q>>>() {
        let cand = project(&RationalVector::new(xr));
        if f.is_interior(&cand) && f.eval(&cand)? <= f.eval(&x)? {
            x = cand;
        }
    }

    // Phase 2: exact certification, with Newton refinement in exact steps.
    let mut best = certify(&f, &x, &verts)?;
    for _ in 0..40 {
        if &scale * (&best.1 - &best.0) <= *tolerance {
            break;
        }
        iterations += 1;
        let g = f.gradient(&x)?;
        let Some((_, _, h)) = f.eval_f64(&x.to_f64()) else {
            break;
        };
        let Some(step) = newton_step(&p, &g.to_f64(), &h) else {
            break;
        };
        let Some(step) = step.iter().map(|&v| from_f64(v)).collect::<Option<Vec<Q>>>() else {
            break;
        };
        let step = RationalVector::new(step);
        let mut s = Q::one();
        let mut improved = false;
        for _ in 0..40 {
            let cand = project(&x.add_scaled(&s, &step));
            if f.is_interior(&cand) && f.eval(&cand)? < best.1 {
                x = cand;
                best = certify(&f, &x, &verts)?;
                improved = true;
                break;
            }
            s /= Q::from_integer(2.into());
        }
        if !improved {
            break;
        }
    }
    let lower = &scale * &best.0;
    let upper = &scale * &best.1;
    let within_tolerance = &upper - &lower <= *tolerance;
    Ok(MinimizeResult {
        xi_star: x,
        lower,
        upper,
        simplicial_exact: false,
        within_tolerance,
        iterations,
    })
}

/// `(lower, upper)` for `min vol` on the slice, from the iterate `x`.
fn certify(f: &VolumeFunction, x: &RationalVector, verts: &[RationalVector]) -> Result<(Q, Q)> {
    let fx = f.eval(x)?;
    let g = f.gradient(x)?;
    let drop = verts.iter().map(|v| g.dot(&(v - x))).min().unwrap_or_else(Q::zero);
    let lower = &fx + drop.min(Q::zero());
    Ok((lower.max(Q::zero()), fx))
}

/// Newton direction restricted to the tangent space spanned by the columns of `p`.
fn newton_step(p: &DMatrix<f64>, g: &[f64], h: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = g.len();
    let gv = DVector::from_column_slice(g);
    let hm = DMatrix::from_fn(n, n, |i, j| h[i][j]);
    let gt = p.transpose() * &gv;
    let ht = p.transpose() * &hm * p;
    let d = match ht.clone().cholesky() {
        Some(c) => c.solve(&(-&gt)),
        None => -gt,
    };
    let step = p * d;
    step.iter()
        .all(|v| v.is_finite())
        .then(|| step.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr, Cone};
    use crate::rv;

    #[test]
    fn example_cone_fast_path() {
        let t = ToricCone::plain(Cone::from_ints(3, &[&[0, 0, 1], &[0, 2, 1], &[1, 0, 0]]).unwrap()).unwrap();
        let r = minimize_nvol(&t, &qr(1, 1_000_000_000)).unwrap();
        assert!(r.simplicial_exact);
        assert_eq!(r.xi_star, rv![1, 2, 2]);
        assert_eq!(r.upper, qr(27, 2));
        let num = minimize_nvol_numeric(&t, &qr(1, 1_000_000_000)).unwrap();
        assert!(num.within_tolerance);
        assert!(num.lower <= qr(27, 2) && qr(27, 2) <= num.upper);
        let dir = num.direction();
        let exact = normalize(&[1.0, 2.0, 2.0]);
        for (a, b) in dir.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn conifold_minimum_on_diagonal() {
        let t =
            ToricCone::plain(Cone::from_ints(3, &[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]]).unwrap()).unwrap();
        let r = minimize_nvol(&t, &qr(1, 1_000_000_000_000)).unwrap();
        assert!(!r.simplicial_exact && r.within_tolerance);
        assert!(r.lower <= q(16) && q(16) <= r.upper);
        let x = r.xi_star.to_f64();
        assert!((x[0] - x[1]).abs() < 1e-9 && (2.0 * x[0] - x[2]).abs() < 1e-9);
    }

    #[test]
    fn smooth_point() {
        let t = ToricCone::plain(Cone::from_ints(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap()).unwrap();
        let r = minimize_nvol(&t, &qr(1, 1000)).unwrap();
        assert_eq!(r.xi_star, rv![1, 1, 1]);
        assert_eq!(r.upper, q(27));
    }
}
