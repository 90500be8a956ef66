use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactgeom::linalg::rank;
use crate::exactgeom::rational::qserde;
use crate::exactgeom::{fmt_q, RationalVector, Q};

/// Coefficients `(λ₁, λ₂)` with `λ₁v₁ + λ₂v₂` a lattice point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Combination {
    #[serde(with = "qserde")]
    pub lambda1: Q,
    #[serde(with = "qserde")]
    pub lambda2: Q,
    pub point: RationalVector,
    #[serde(with = "qserde")]
    pub bound1: Q,
    #[serde(with = "qserde")]
    pub bound2: Q,
}

/// Greatest common divisor of the 2×2 minors of `[v₁ v₂]`.
fn minor_gcd(v1: &RationalVector, v2: &RationalVector) -> BigInt {
    let mut g = BigInt::zero();
    for i in 0..v1.rank() {
        for j in i + 1..v1.rank() {
            let m = &v1[i] * &v2[j] - &v1[j] * &v2[i];
            g = g.gcd(m.numer());
        }
    }
    g
}

fn check_inputs(v1: &RationalVector, v2: &RationalVector, ell: &BigInt) -> Result<BigInt> {
    if v1.rank() != v2.rank() {
        return Err(Error::Dimension {
            expected: v1.rank(),
            got: v2.rank(),
        });
    }
    if !v1.is_integral() || !v2.is_integral() || v1.primitive() != *v1 || v2.primitive() != *v2 {
        return Err(Error::Invalid("combine_rays needs primitive lattice vectors".into()));
    }
    if rank(&[v1.clone(), v2.clone()]) < 2 {
        return Err(Error::Invalid(format!("{v1} and {v2} are linearly dependent")));
    }
    if !ell.is_positive() {
        return Err(Error::Invalid("ℓ must be positive".into()));
    }
    Ok(minor_gcd(v1, v2))
}

/// The lattice `{(λ₁, λ₂) : λ₁v₁ + λ₂v₂ ∈ Zʳ}` in the form used by the
/// search: coefficients have denominator `g` (the gcd of the 2×2 minors), the
/// attainable `λ₂` are the multiples of `y₀/g`, and since `v₁` is primitive
/// `λ₂ = k·y₀/g` fixes `λ₁ ≡ k·x₀/g` modulo 1.
struct CoefficientLattice {
    g: i64,
    x0: i64,
    y0: i64,
}

fn to_small(v: &RationalVector) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            x.to_integer()
                .to_i64()
                .ok_or_else(|| Error::Invalid("entries too large".into()))
        })
        .collect()
}

fn coefficient_lattice(v1: &RationalVector, v2: &RationalVector, g: &BigInt) -> Result<CoefficientLattice> {
    let g = g
        .to_i64()
        .filter(|g| *g <= 1_000_000)
        .ok_or_else(|| Error::Invalid("search box too large".into()))?;
    let (a, b) = (to_small(v1)?, to_small(v2)?);
    let integral = |x: i64, y: i64| {
        a.iter()
            .zip(&b)
            .all(|(p, q)| (x as i128 * *p as i128 + y as i128 * *q as i128) % g as i128 == 0)
    };
    // Scan λ₂ = y/g upward; for each y the congruence on one coordinate leaves
    // gcd(v₁[i], g) residues for x.
    let i = (0..a.len())
        .filter(|&i| a[i] != 0)
        .min_by_key(|&i| a[i].abs())
        .expect("v₁ is nonzero");
    let d = a[i].gcd(&g);
    let step = g / d;
    for y in 1..=g {
        let rhs = (-(y as i128) * b[i] as i128).rem_euclid(g as i128) as i64;
        if rhs % d != 0 {
            continue;
        }
        // x·(a_i/d) ≡ rhs/d (mod g/d).
        let inv = mod_inverse((a[i] / d).rem_euclid(step), step);
        let base = ((rhs / d) as i128 * inv as i128).rem_euclid(step as i128) as i64;
        if let Some(x) = (0..d).map(|t| base + t * step).find(|&x| integral(x, y)) {
            return Ok(CoefficientLattice { g, x0: x, y0: y });
        }
    }
    unreachable!("(λ₁, λ₂) = (1, 1) is always a lattice combination")
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as i64
}

/// The box `0 < λ₁ ≤ ℓ`, `0 < λ₂ ≤ ℓ²/μ(w)` over the coefficient lattice.
///
/// The box is closed: for a unimodular pair with `μ(w) = ℓ = 1` the only
/// lattice combinations have integral coefficients, so `λ₁ = λ₂ = 1` is forced.
struct SearchBox<'a> {
    v1: &'a RationalVector,
    v2: &'a RationalVector,
    lat: CoefficientLattice,
    bound1: Q,
    bound2: Q,
    /// Number of attainable `λ₂` values in the box.
    rows: i64,
}

impl<'a> SearchBox<'a> {
    fn new(v1: &'a RationalVector, v2: &'a RationalVector, mu_w: &BigInt, ell: &BigInt) -> Result<SearchBox<'a>> {
        let g = check_inputs(v1, v2, ell)?;
        let lat = coefficient_lattice(v1, v2, &g)?;
        let bound1 = Q::from_integer(ell.clone());
        let bound2 = Q::new(ell * ell, mu_w.clone());
        let rows = (&bound2 * Q::new(lat.g.into(), lat.y0.into()))
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::Invalid("search box too large".into()))?;
        Ok(SearchBox {
            v1,
            v2,
            lat,
            bound1,
            bound2,
            rows,
        })
    }

    /// Admissible pairs with `λ₂ = k·y₀/g`, by increasing `λ₁`.
    fn row(&self, k: i64) -> Vec<Combination> {
        let g = BigInt::from(self.lat.g);
        let lambda2 = Q::new(BigInt::from(k) * self.lat.y0, g.clone());
        let x = (k as i128 * self.lat.x0 as i128).rem_euclid(self.lat.g as i128) as i64;
        let x = if x == 0 { self.lat.g } else { x };
        let rest = self.v2.scale(&lambda2);
        let mut lambda1 = Q::new(x.into(), g);
        let mut out = Vec::new();
        while lambda1 <= self.bound1 {
            out.push(Combination {
                point: self.v1.scale(&lambda1).add_scaled(&Q::one(), &rest),
                lambda1: lambda1.clone(),
                lambda2: lambda2.clone(),
                bound1: self.bound1.clone(),
                bound2: self.bound2.clone(),
            });
            lambda1 += Q::one();
        }
        out
    }
}

/// Lattice combination of two primitive ray generators with bounded
/// coefficients: the smallest `λ₂`, then the smallest `λ₁`.
///
/// `mu_w` is `μ(w)` and `ell` is `lcm(μ(w′₁), μ(w′₂))`, where `v₁, v₂` are the
/// primitive generators of the rays through `w + w′₁` and `w + w′₂`.
/// No admissible pair means the bounded existence statement failed, which is
/// reported as a certificate error.
pub fn combine_rays(v1: &RationalVector, v2: &RationalVector, mu_w: &BigInt, ell: &BigInt) -> Result<Combination> {
    let b = SearchBox::new(v1, v2, mu_w, ell)?;
    (1..=b.rows)
        .find_map(|k| b.row(k).into_iter().next())
        .ok_or_else(|| no_pair(v1, v2, mu_w, ell))
}

/// Like [`combine_rays`] but minimizing `λ₁a₁ + λ₂a₂` (ties: smallest `λ₂`).
pub fn combine_rays_min(
    v1: &RationalVector,
    v2: &RationalVector,
    mu_w: &BigInt,
    ell: &BigInt,
    a1: &Q,
    a2: &Q,
) -> Result<Combination> {
    let b = SearchBox::new(v1, v2, mu_w, ell)?;
    let mut best: Option<(Q, Combination)> = None;
    for k in 1..=b.rows {
        for c in b.row(k) {
            let f = &c.lambda1 * a1 + &c.lambda2 * a2;
            if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                best = Some((f, c));
            }
        }
    }
    best.map(|(_, c)| c).ok_or_else(|| no_pair(v1, v2, mu_w, ell))
}

fn no_pair(v1: &RationalVector, v2: &RationalVector, mu_w: &BigInt, ell: &BigInt) -> Error {
    Error::Certificate(format!(
        "no lattice point λ₁{v1} + λ₂{v2} with 0 < λ₁ ≤ {ell}, 0 < λ₂ ≤ {}",
        fmt_q(&Q::new(ell * ell, mu_w.clone()))
    ))
}

/// `ℓ = lcm(μ(w′₁), μ(w′₂))` for the standard lattice.
pub fn ell_of(w1: &RationalVector, w2: &RationalVector) -> BigInt {
    w1.denominator_lcm().lcm(&w2.denominator_lcm()).max(BigInt::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::qr;
    use crate::rv;

    #[test]
    fn base_case() {
        let c = combine_rays(&rv![1, 0], &rv![1, 3], &BigInt::from(3), &BigInt::one()).unwrap();
        assert_eq!((c.lambda1, c.lambda2), (qr(2, 3), qr(1, 3)));
        assert_eq!(c.point, rv![1, 1]);
    }

    #[test]
    fn orthogonal_case() {
        let c = combine_rays(&rv![1, 0], &rv![0, 1], &BigInt::one(), &BigInt::one()).unwrap();
        assert_eq!((c.lambda1.clone(), c.lambda2.clone()), (qr(1, 1), qr(1, 1)));
        assert_eq!(c.lambda1, c.bound1);
        assert_eq!(c.lambda2, c.bound2);
    }

    /// Naive scan of the `(1/g)Z²` grid.
    fn grid(v1: &RationalVector, v2: &RationalVector, mu: i64, ell: i64) -> Option<(Q, Q)> {
        let g = minor_gcd(v1, v2).to_i64().unwrap();
        let max2 = ell * ell * g / mu;
        (1..=max2).find_map(|j| {
            (1..=ell * g).find_map(|i| {
                let (l1, l2) = (qr(i, g), qr(j, g));
                v1.scale(&l1).add_scaled(&l2, v2).is_integral().then_some((l1, l2))
            })
        })
    }

    #[test]
    fn agrees_with_grid_scan() {
        let vs = [
            rv![1, 0],
            rv![1, 3],
            rv![2, 5],
            rv![-3, 7],
            rv![4, 1],
            rv![0, 1],
            rv![5, -2],
        ];
        for a in &vs {
            for b in &vs {
                if rank(&[a.clone(), b.clone()]) < 2 {
                    continue;
                }
                for mu in 1..=4 {
                    for ell in 1..=3 {
                        let c = combine_rays(a, b, &BigInt::from(mu), &BigInt::from(ell)).ok();
                        assert_eq!(
                            c.map(|c| (c.lambda1, c.lambda2)),
                            grid(a, b, mu, ell),
                            "{a} {b} {mu} {ell}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dependent_inputs_rejected() {
        assert!(combine_rays(&rv![1, 0], &rv![2, 0], &BigInt::one(), &BigInt::one()).is_err());
    }
}
