use std::collections::BTreeSet;

use fcl_core::exactgeom::{
    polytope_volume, primitive_and_multiplicity, q, qr, Cone, Lattice, Polyhedron, RationalVector, Q,
};
use fcl_core::hyper::{lichnerowicz_curve, lichnerowicz_derivative, nvol_weighted, WeightSystem};
use fcl_core::kollar::{combine_rays, ell_of, height_bounds, sigma_z};
use fcl_core::pdiv::vertex_multiplicity;
use fcl_core::testkit::random_suite;
use fcl_core::toricvol::{nvol_xi, ToricCone};
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 200,
        ..ProptestConfig::default()
    }
}

fn int_vec(rank: usize) -> impl Strategy<Value = RationalVector> {
    prop::collection::vec(-3i64..=3, rank).prop_map(|v| RationalVector::from_ints(&v))
}

fn rat_vec(rank: usize) -> impl Strategy<Value = RationalVector> {
    prop::collection::vec((-8i64..=8, 1i64..=4), rank)
        .prop_map(|v| RationalVector::new(v.into_iter().map(|(n, d)| qr(n, d)).collect()))
}

fn cone_gens() -> impl Strategy<Value = (usize, Vec<RationalVector>)> {
    (1usize..=3).prop_flat_map(|r| (Just(r), prop::collection::vec(int_vec(r), 1..=4)))
}

/// A unimodular integer matrix as a product of elementary row operations.
fn unimodular(rank: usize) -> impl Strategy<Value = Vec<RationalVector>> {
    prop::collection::vec((0..rank, 0..rank, -2i64..=2, any::<bool>()), 0..6).prop_map(move |ops| {
        let mut m: Vec<RationalVector> = (0..rank).map(|i| RationalVector::unit(rank, i)).collect();
        for (i, j, c, swap) in ops {
            if i == j {
                continue;
            }
            if swap {
                m.swap(i, j);
            } else {
                let row = m[i].add_scaled(&Q::from_integer(c.into()), &m[j]);
                m[i] = row;
            }
        }
        m
    })
}

fn apply(m: &[RationalVector], v: &RationalVector) -> RationalVector {
    RationalVector::new(m.iter().map(|row| row.dot(v)).collect())
}

fn nonneg_combination(gens: &[RationalVector], coeffs: &[u8]) -> RationalVector {
    gens.iter()
        .zip(coeffs)
        .fold(RationalVector::zeros(gens[0].rank()), |acc, (g, &c)| {
            acc.add_scaled(&q(c as i64), g)
        })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn dual_is_an_involution((r, gens) in cone_gens()) {
        let c = Cone::new(r, &gens).unwrap();
        prop_assert_eq!(c.dual().dual(), c.clone());
        for g in &gens {
            prop_assert!(c.contains(g));
        }
    }

    #[test]
    fn face_sets_intersect((r, gens) in cone_gens(), a in prop::collection::vec(0u8..3, 4), b in prop::collection::vec(0u8..3, 4)) {
        let c = Cone::new(r, &gens).unwrap();
        let v = nonneg_combination(&gens, &a);
        let w = nonneg_combination(&gens, &b);
        let fv = c.face_sets(&v).unwrap();
        let fw = c.face_sets(&w).unwrap();
        let both: BTreeSet<_> = fv.intersection(&fw).cloned().collect();
        prop_assert_eq!(c.face_sets(&(&v + &w)).unwrap(), both);
    }

    #[test]
    fn minkowski_sum_is_commutative_and_associative(
        p in prop::collection::vec(rat_vec(2), 1..4),
        q in prop::collection::vec(rat_vec(2), 1..4),
        s in prop::collection::vec(rat_vec(2), 1..4),
        tail in prop::sample::select(vec![0usize, 1, 2]),
    ) {
        let cone = match tail {
            0 => Cone::zero(2),
            1 => Cone::from_ints(2, &[&[1, 0], &[1, 2]]).unwrap(),
            _ => Cone::from_ints(2, &[&[1, 0]]).unwrap(),
        };
        let p = Polyhedron::new(&p, cone.clone()).unwrap();
        let q = Polyhedron::new(&q, cone.clone()).unwrap();
        let s = Polyhedron::new(&s, cone).unwrap();
        let pq = p.minkowski_sum(&q).unwrap();
        prop_assert_eq!(&pq, &q.minkowski_sum(&p).unwrap());
        prop_assert_eq!(pq.minkowski_sum(&s).unwrap(), p.minkowski_sum(&q.minkowski_sum(&s).unwrap()).unwrap());
        for x in p.vertices() {
            for y in q.vertices() {
                prop_assert!(pq.contains(&(x + y)));
            }
        }
    }

    #[test]
    fn volume_is_lattice_invariant(
        (r, pts, u) in (2usize..=3).prop_flat_map(|r| (Just(r), prop::collection::vec(rat_vec(r), 1..7), unimodular(r))),
        k in 1i64..=3,
    ) {
        let std = Lattice::standard(r);
        let v = polytope_volume(&pts, &std).unwrap();
        let moved: Vec<_> = pts.iter().map(|p| apply(&u, p)).collect();
        prop_assert_eq!(&polytope_volume(&moved, &std).unwrap(), &v);
        prop_assert_eq!(&polytope_volume(&pts, &std.rebased(&u).unwrap()).unwrap(), &v);
        let scaled: Vec<_> = pts.iter().map(|p| p.scale(&q(k))).collect();
        let kn = (0..r).fold(q(1), |acc, _| acc * q(k));
        prop_assert_eq!(polytope_volume(&scaled, &std).unwrap(), &v * kn);
    }

    #[test]
    fn multiplicity_is_scale_independent(v in rat_vec(3), num in 1i64..=6, den in 1i64..=6) {
        prop_assume!(!v.is_zero());
        let lat = Lattice::standard(3);
        let (p1, m1) = primitive_and_multiplicity(&v, &lat).unwrap();
        let w = v.scale(&qr(num, den));
        let (p2, m2) = primitive_and_multiplicity(&w, &lat).unwrap();
        prop_assert!(p1.is_integral() && p2.is_integral());
        prop_assert_eq!(&p1, &v.scale(&Q::from_integer(m1)));
        prop_assert_eq!(&p2, &w.scale(&Q::from_integer(m2)));
        prop_assert_eq!(lat.primitive_generator(&p1), lat.primitive_generator(&p2));
        let (_, one) = primitive_and_multiplicity(&p1, &lat).unwrap();
        prop_assert_eq!(one, BigInt::from(1));
    }

    #[test]
    fn combined_rays_stay_in_the_box(w in rat_vec(2), w1 in rat_vec(2), w2 in rat_vec(2)) {
        let s1 = &w + &w1;
        let s2 = &w + &w2;
        prop_assume!(!s1.is_zero() && !s2.is_zero());
        let lat = Lattice::standard(2);
        let v1 = lat.primitive_generator(&s1);
        let v2 = lat.primitive_generator(&s2);
        prop_assume!(!v1.same_ray(&v2) && !v1.same_ray(&v2.scale(&q(-1))));
        let mu = vertex_multiplicity(&w);
        let ell = ell_of(&w1, &w2);
        if let Ok(c) = combine_rays(&v1, &v2, &mu, &ell) {
            prop_assert!(c.lambda1 > q(0) && c.lambda1 <= c.bound1);
            prop_assert!(c.lambda2 > q(0) && c.lambda2 <= c.bound2);
            prop_assert!(c.point.is_integral());
            prop_assert_eq!(c.point, v1.scale(&c.lambda1).add_scaled(&c.lambda2, &v2));
        }
    }

    #[test]
    fn weighted_volume_is_scale_invariant(w in prop::collection::vec(1i64..=6, 3..=5), d in 1i64..=12, k in 1i64..=5) {
        let ws = WeightSystem::from_ints(&w, d).unwrap();
        prop_assume!(ws.index() > q(0));
        let scaled = WeightSystem::new(ws.weights().iter().map(|x| x * q(k)).collect(), ws.degree() * q(k)).unwrap();
        prop_assert_eq!(nvol_weighted(&ws).unwrap(), nvol_weighted(&scaled).unwrap());
    }

    #[test]
    fn toric_volume_is_scale_invariant(num in 1i64..=5, den in 1i64..=5, x in 1i64..=4, y in 1i64..=4) {
        let t = ToricCone::plain(Cone::from_ints(3, &[&[0, 0, 1], &[0, 2, 1], &[1, 0, 0]]).unwrap()).unwrap();
        let xi = RationalVector::from_ints(&[x, y, 2 * y + 1]);
        prop_assert_eq!(nvol_xi(&t, &xi).unwrap(), nvol_xi(&t, &xi.scale(&qr(num, den))).unwrap());
    }
}

#[test]
fn heights_on_random_instances() {
    let mut checked = 0;
    for (d, delta) in random_suite(5, 100) {
        let Some([1, p, qq]) = d.type_triple().as_triple() else {
            continue;
        };
        let z = d.labels().find(|y| d.multiplicity_over(y) == BigInt::from(qq)).cloned();
        let Some(z) = z else { continue };
        let s = sigma_z(&d, &delta, &z).unwrap();
        let (lo, hi) = height_bounds(&s);
        assert!(lo >= q(-(p as i64)), "{}: min height {lo}", d.type_triple());
        assert_eq!(hi, q(qq as i64), "{}", d.type_triple());
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn lichnerowicz_curve_on_random_weights() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut tested = 0;
    while tested < 50 {
        let n = rng.gen_range(2..=4usize);
        let w: Vec<i64> = (0..=n).map(|_| rng.gen_range(1..=7)).collect();
        let d = rng.gen_range(1..=14);
        let ws = WeightSystem::from_ints(&w, d).unwrap();
        if ws.index() <= q(0) {
            continue;
        }
        tested += 1;
        let slack = Q::from_integer((n as i64).into()) * &ws.weights()[0] - ws.index();
        let v0 = lichnerowicz_curve(&ws, &q(0)).unwrap();
        if slack > q(0) {
            for j in 1..=20 {
                assert!(lichnerowicz_curve(&ws, &qr(j, 4)).unwrap() >= v0, "{ws} at s = {j}/4");
            }
        }
        let h = qr(1, 1_000_000_000_000);
        let fd = (lichnerowicz_curve(&ws, &h).unwrap() - &v0) / &h;
        let exact = lichnerowicz_derivative(&ws).unwrap();
        let err = (fd - &exact).abs() / exact.abs().max(q(1));
        assert!(err <= qr(1, 100_000_000), "{ws}");
    }
}
