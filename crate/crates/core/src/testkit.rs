//! Seeded instance generators shared by tests, the self-test and benchmarks.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disc::solve_gorenstein;
use crate::exactgeom::linalg::{det, solve, LinearSolution};
use crate::exactgeom::{q, qr, Cone, RationalVector, Q};
use crate::pdiv::{vertex_b, Boundary, PDivisor};

/// Coefficients used for random boundaries.
pub fn boundary_choices() -> [Q; 3] {
    [q(0), qr(1, 2), qr(2, 3)]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All points of `[−4, 4]²` with denominators at most 4.
fn small_points() -> Vec<RationalVector> {
    let mut out = Vec::new();
    for den in 1..=4i64 {
        for x in -4 * den..=4 * den {
            for y in -4 * den..=4 * den {
                let v = RationalVector::new(vec![qr(x, den), qr(y, den)]);
                if v.denominator_lcm() == den.into() {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Picks a point, drawing its denominator first so that lattice points and
/// small multiplicities are common.
fn pick_point<'a>(rng: &mut ChaCha8Rng, pts: &[&'a RationalVector]) -> Option<&'a RationalVector> {
    let weights = [8u32, 5, 3, 2];
    let mut dens: Vec<i64> = (1..=4)
        .filter(|d| pts.iter().any(|p| p.denominator_lcm() == (*d).into()))
        .collect();
    dens.shuffle(rng);
    let den = *dens.choose_weighted(rng, |d| weights[*d as usize - 1]).ok()?;
    let of_den: Vec<&&RationalVector> = pts.iter().filter(|p| p.denominator_lcm() == den.into()).collect();
    of_den.choose(rng).map(|p| **p)
}

fn primitive_pair(rng: &mut ChaCha8Rng) -> (RationalVector, RationalVector) {
    loop {
        let mut pick = || loop {
            let v = RationalVector::from_ints(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)]);
            if !v.is_zero() && v.primitive() == v {
                return v;
            }
        };
        let (a, b) = (pick(), pick());
        if det(&[a.clone(), b.clone()]).is_positive() {
            return (a, b);
        }
    }
}

/// A proper klt Q-Gorenstein p-divisor of rank 2 with at most three stored
/// labels, vertex denominators at most 4 and boundary coefficients in
/// `{0, 1/2, 2/3}`.
///
/// The Gorenstein form `u` is fixed first from the tail rays; one vertex per
/// label is then drawn uniformly among the points solving its equation, so
/// that most draws are Q-Gorenstein. Draws are rejected until all conditions hold.
pub fn random_pdivisor(rng: &mut ChaCha8Rng) -> (PDivisor, Boundary) {
    random_qgorenstein(rng, true)
}

/// Like [`random_pdivisor`], with the klt filter optional and up to four
/// stored labels when it is off.
pub fn random_qgorenstein(rng: &mut ChaCha8Rng, require_klt: bool) -> (PDivisor, Boundary) {
    let points = small_points();
    let choices = boundary_choices();
    let labels = ["0", "1", "∞", "t"];
    let max_labels = if require_klt { 3 } else { 4 };
    loop {
        let (n1, n2) = primitive_pair(rng);
        let c1 = choices.choose(rng).unwrap().clone();
        let c2 = choices.choose(rng).unwrap().clone();
        // ⟨u, nᵢ⟩ = cᵢ − 1 makes a(D_ρ) = 1 − c_ρ on free rays.
        let u = match solve(&[n1.clone(), n2.clone()], &[&c1 - Q::one(), &c2 - Q::one()], 2) {
            LinearSolution::Unique(u) => u,
            _ => continue,
        };
        let count = rng.gen_range(1..=max_labels);
        let k = [-1i64, -1, 0, 0];
        // a_y = k_y + b_y − ⟨u, v_y⟩ with Σ a_y = 0 over all labels; labels
        // beyond the stored ones carry a_y = k_y.
        let mut a_sum: Q = k[count..].iter().map(|&x| Q::from_integer(x.into())).sum();
        let mut coeffs: Vec<(&str, Vec<RationalVector>)> = Vec::new();
        let mut vertical = Vec::new();
        let mut ok = true;
        for (i, y) in labels.iter().take(count).enumerate() {
            let c = choices.choose(rng).unwrap().clone();
            let ky = Q::from_integer(k[i].into());
            let v = if i + 1 < count {
                let all: Vec<&RationalVector> = points.iter().collect();
                pick_point(rng, &all).unwrap().clone()
            } else {
                // Fix the last vertex by Σ a_y = 0.
                let target = -a_sum.clone();
                let sols: Vec<&RationalVector> = points
                    .iter()
                    .filter(|v| &ky + vertex_b(v, &c) - u.dot(v) == target)
                    .collect();
                match pick_point(rng, &sols) {
                    Some(v) => v.clone(),
                    None => {
                        ok = false;
                        break;
                    }
                }
            };
            let ay = &ky + vertex_b(&v, &c) - u.dot(&v);
            a_sum += &ay;
            let mut vs = vec![v.clone()];
            // Occasionally a second vertex on the same level of u.
            if rng.gen_bool(0.25) {
                let c2 = choices.choose(rng).unwrap().clone();
                let level: Vec<&RationalVector> = points
                    .iter()
                    .filter(|w| **w != v && &ky + vertex_b(w, &c2) - u.dot(w) == ay)
                    .collect();
                if let Some(w) = pick_point(rng, &level) {
                    vs.push(w.clone());
                    vertical.push((y.to_string(), w.clone(), c2));
                }
            }
            vertical.push((y.to_string(), v, c));
            coeffs.push((y, vs));
        }
        if !ok || !a_sum.is_zero() {
            continue;
        }
        let Ok(tail) = Cone::new(2, &[n1.clone(), n2.clone()]) else {
            continue;
        };
        let Ok(d) = PDivisor::from_vertices(tail, &coeffs) else {
            continue;
        };
        if !d.is_proper().proper {
            continue;
        }
        let vertical: Vec<_> = vertical
            .into_iter()
            .filter(|(y, v, _)| d.coefficients()[y].vertex_index(v).is_some())
            .collect();
        let free = d.free_rays();
        let horizontal: Vec<_> = [(n1, c1), (n2, c2)]
            .into_iter()
            .filter(|(n, _)| free.contains(n))
            .collect();
        let Ok(delta) = Boundary::new(&d, horizontal, vertical) else {
            continue;
        };
        if (require_klt && !d.is_klt(&delta)) || solve_gorenstein(&d, &delta).is_err() {
            continue;
        }
        return (d, delta);
    }
}

/// `count` random instances from `seed`.
pub fn random_suite(seed: u64, count: usize) -> Vec<(PDivisor, Boundary)> {
    let mut r = rng(seed);
    (0..count).map(|_| random_pdivisor(&mut r)).collect()
}

/// Hand-built instances of type `(2,p,q)`: `u = (−1,0)`, tail
/// `cone{(1,a),(1,b)}` with `a < 0 < b`, and coefficients
/// `(1/2, x₀)`, `(1/p, x₁)`, `((1−q)/q, −x₀−x₁)` whose sum `(s, 0)`,
/// `s = 1/2 + 1/p + 1/q − 1`, lies in the interior of the tail.
pub fn type_2pq_suite() -> Vec<(String, PDivisor)> {
    let types = [(2, 2), (2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (3, 5)];
    let shapes = [(-1, 1, 0, 0), (-2, 3, 1, 0), (-3, 1, 0, 1)];
    let mut out = Vec::new();
    for (i, &(p, qq)) in types.iter().enumerate() {
        for (j, &(a, b, x0, x1)) in shapes.iter().enumerate() {
            if out.len() == 20 {
                break;
            }
            let tail = Cone::from_ints(2, &[&[1, a], &[1, b]]).expect("rank 2");
            let d = PDivisor::from_vertices(
                tail,
                &[
                    ("0", vec![RationalVector::new(vec![qr(1, 2), q(x0)])]),
                    ("1", vec![RationalVector::new(vec![qr(1, p), q(x1)])]),
                    ("∞", vec![RationalVector::new(vec![qr(1 - qq, qq), q(-x0 - x1)])]),
                ],
            )
            .expect("proper by construction");
            out.push((format!("(2,{p},{qq})#{}", 3 * i + j), d));
        }
    }
    out
}

/// Variants of [`type_2pq_suite`] whose degree vertex `(s, s·a)` lies on the
/// tail ray `(1, a)`, so that the ray meets the degree. Shapes whose shifted
/// vertex raises a multiplicity past klt are dropped.
pub fn type_2pq_boundary_suite() -> Vec<(String, PDivisor)> {
    let types = [(2, 2), (2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (3, 5)];
    let shapes = [(-1, 1, 0, 0), (-2, 3, 1, 0), (-3, 1, 0, 1)];
    let mut out = Vec::new();
    for &(p, qq) in &types {
        for &(a, b, x0, x1) in &shapes {
            let s = qr(1, 2) + qr(1, p) + qr(1, qq) - Q::one();
            let tail = Cone::from_ints(2, &[&[1, a], &[1, b]]).expect("rank 2");
            let x2 = qr(-x0 - x1, 1) + &s * q(a);
            let d = PDivisor::from_vertices(
                tail,
                &[
                    ("0", vec![RationalVector::new(vec![qr(1, 2), q(x0)])]),
                    ("1", vec![RationalVector::new(vec![qr(1, p), q(x1)])]),
                    ("∞", vec![RationalVector::new(vec![qr(1 - qq, qq), x2])]),
                ],
            )
            .expect("proper by construction");
            if d.is_klt(&Boundary::zero()) {
                out.push((format!("(2,{p},{qq})/a={a}"), d));
            }
        }
    }
    out
}

/// Non-klt instances with `Σ (μ−1)/μ ≥ 2`: vertices `(1/μ, 0)` over up to
/// four labels and tail `cone{(1,0),(1,b)}`, so the degree vertex lies on
/// the ray `(1,0)`.
pub fn non_klt_suite() -> Vec<(String, PDivisor)> {
    let types: [&[i64]; 8] = [
        &[2, 3, 6],
        &[2, 4, 4],
        &[3, 3, 3],
        &[2, 3, 7],
        &[3, 3, 4],
        &[2, 5, 5],
        &[2, 2, 2, 2],
        &[2, 2, 2, 3],
    ];
    let labels = ["0", "1", "∞", "t"];
    let mut out = Vec::new();
    for mus in types {
        for b in [1, 3] {
            let tail = Cone::from_ints(2, &[&[1, 0], &[1, b]]).expect("rank 2");
            let coeffs: Vec<(&str, Vec<RationalVector>)> = labels
                .iter()
                .zip(mus)
                .map(|(y, &m)| (*y, vec![RationalVector::new(vec![qr(1, m), q(0)])]))
                .collect();
            let d = PDivisor::from_vertices(tail, &coeffs).expect("proper by construction");
            let name: Vec<String> = mus.iter().map(|m| m.to_string()).collect();
            out.push((format!("({})/b={b}", name.join(",")), d));
        }
    }
    out
}

/// A random ray generator with small entries inside a random pair of
/// tail directions plus a denominator-≤4 point, used by property tests.
pub fn random_point(rng: &mut ChaCha8Rng, rank: usize, den: i64) -> RationalVector {
    RationalVector::new(
        (0..rank)
            .map(|_| {
                let d = rng.gen_range(1..=den);
                qr(rng.gen_range(-4 * d..=4 * d), d)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::{boundary_coefficient, log_discrepancy, prime_divisors};

    #[test]
    fn random_instances_are_valid() {
        for (d, delta) in random_suite(7, 20) {
            assert!(d.is_proper().proper);
            assert!(d.is_klt(&delta));
            let g = solve_gorenstein(&d, &delta).unwrap();
            for p in prime_divisors(&d) {
                let a = log_discrepancy(&g, &d, &delta, &p).unwrap();
                assert_eq!(a, Q::one() - boundary_coefficient(&delta, &p));
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = random_suite(3, 5);
        let b = random_suite(3, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn non_klt_instances() {
        for (name, d) in non_klt_suite() {
            assert!(d.is_proper().proper, "{name}");
            assert!(!d.is_klt(&Boundary::zero()), "{name}");
            assert!(solve_gorenstein(&d, &Boundary::zero()).is_ok(), "{name}");
        }
    }

    #[test]
    fn type_2pq_instances() {
        let s = type_2pq_suite();
        assert_eq!(s.len(), 20);
        for (name, d) in &s {
            assert!(d.is_klt(&Boundary::zero()), "{name}");
            let g = solve_gorenstein(d, &Boundary::zero()).unwrap();
            assert_eq!(g.u, crate::rv![-1, 0], "{name}");
            assert_eq!(d.type_triple().as_triple().unwrap()[0], 2, "{name}");
        }
    }
}
