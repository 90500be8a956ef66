//! The acceptance criteria, runnable from the binary and from tests.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fcl_core::disc::{
    boundary_coefficient, horizontal_linearity_check, log_discrepancy, prime_divisors, solve_gorenstein,
    solve_gorenstein_with, DivisorSpec, GorensteinData,
};
use fcl_core::exactgeom::linalg::det;
use fcl_core::exactgeom::rational::{pow, to_f64};
use fcl_core::exactgeom::{fmt_q, polytope_volume, q, qr, Cone, Lattice, Polyhedron, RationalVector, Q};
use fcl_core::hyper::{
    check_conditions, degeneration_family, lichnerowicz_curve, lichnerowicz_derivative, lichnerowicz_unstable,
    nvol_multigraded, running_quadric, screen, screen_bruteforce, t1_support, ScreenCaps, WeightSystem,
};
use fcl_core::kollar::{mld_bound_witness, toric_crosscheck, Branch};
use fcl_core::pdiv::{Boundary, PDivisor};
use fcl_core::testkit::{non_klt_suite, random_qgorenstein, random_suite, type_2pq_boundary_suite, type_2pq_suite};
use fcl_core::toricvol::{minimize_nvol, minimize_nvol_numeric, nvol_xi, NvolValue, ToricCone};

/// Options shared by all criteria.
#[derive(Clone, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Random instances for the discrepancy and witness suites.
    pub instances: usize,
    /// Random cases per kernel property.
    pub kernel_cases: usize,
    /// Tag or criterion number; `None` runs everything.
    pub filter: Option<String>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 11,
            instances: 100,
            kernel_cases: 200,
            filter: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub passed: bool,
    /// Individual checks evaluated.
    pub checks: usize,
    pub failures: Vec<String>,
    pub summary: String,
    pub elapsed_ms: u128,
    pub budget_ms: Option<u128>,
}

impl CriterionReport {
    /// One line: `[PASS] 3 discrepancy oracle suite (…) 1234 ms`.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "[{status}] {} {}: {} ({} ms)",
            self.id, self.name, self.summary, self.elapsed_ms
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Accumulates checks and failures of one criterion.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.checks += 1;
        self.failures.push(what);
    }
}

type CriterionFn = fn(&SelftestOptions, &mut Tally) -> String;

struct Criterion {
    id: u32,
    name: &'static str,
    tags: &'static [&'static str],
    budget: Option<Duration>,
    run: CriterionFn,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "quotient volumes",
        tags: &["toric", "toricvol"],
        budget: Some(Duration::from_secs(12)),
        run: quotient_volumes,
    },
    Criterion {
        id: 2,
        name: "toric example minimizer",
        tags: &["toric", "toricvol", "hyper"],
        budget: Some(Duration::from_secs(5)),
        run: toric_example,
    },
    Criterion {
        id: 3,
        name: "discrepancy oracle suite",
        tags: &["disc", "random"],
        budget: Some(Duration::from_secs(60)),
        run: discrepancy_suite,
    },
    Criterion {
        id: 4,
        name: "klt and platonic types",
        tags: &["pdiv", "random"],
        budget: None,
        run: klt_platonic,
    },
    Criterion {
        id: 5,
        name: "mld-bound witnesses",
        tags: &["kollar", "random"],
        budget: Some(Duration::from_secs(120)),
        run: mld_witnesses,
    },
    Criterion {
        id: 6,
        name: "Lichnerowicz curve",
        tags: &["hyper"],
        budget: None,
        run: lichnerowicz,
    },
    Criterion {
        id: 7,
        name: "hypersurface screen",
        tags: &["hyper"],
        budget: Some(Duration::from_secs(30)),
        run: hypersurface_screen,
    },
    Criterion {
        id: 8,
        name: "degeneration obstruction",
        tags: &["hyper"],
        budget: None,
        run: degeneration,
    },
    Criterion {
        id: 9,
        name: "kernel property suite",
        tags: &["kernel", "exactgeom"],
        budget: None,
        run: kernel_properties,
    },
];

fn selected(c: &Criterion, filter: &Option<String>) -> bool {
    match filter.as_deref() {
        None => true,
        Some(f) => f
            .split(',')
            .map(str::trim)
            .any(|f| f == c.id.to_string() || c.tags.contains(&f)),
    }
}

/// Known filter values: criterion numbers and tags.
pub fn filter_values() -> BTreeSet<String> {
    CRITERIA
        .iter()
        .flat_map(|c| c.tags.iter().map(|t| t.to_string()).chain([c.id.to_string()]))
        .collect()
}

pub fn run_selftest(opts: &SelftestOptions) -> SelftestReport {
    let criteria = CRITERIA
        .iter()
        .filter(|c| selected(c, &opts.filter))
        .map(|c| {
            let start = Instant::now();
            let mut tally = Tally::default();
            let summary = (c.run)(opts, &mut tally);
            let elapsed = start.elapsed();
            if let Some(b) = c.budget {
                tally.check(elapsed <= b, || {
                    format!("took {} ms, budget {} ms", elapsed.as_millis(), b.as_millis())
                });
            }
            CriterionReport {
                id: c.id,
                name: c.name,
                tags: c.tags,
                passed: tally.failures.is_empty(),
                checks: tally.checks,
                summary: if tally.failures.is_empty() {
                    summary
                } else {
                    format!(
                        "{summary}; {} failure(s), first: {}",
                        tally.failures.len(),
                        tally.failures[0]
                    )
                },
                failures: tally.failures,
                elapsed_ms: elapsed.as_millis(),
                budget_ms: c.budget.map(|b| b.as_millis()),
            }
        })
        .collect();
    SelftestReport {
        seed: opts.seed,
        criteria,
    }
}

fn quotient_volumes(_: &SelftestOptions, t: &mut Tally) -> String {
    let mut slowest = Duration::ZERO;
    for n in 2..=3usize {
        for m in 1..=6i64 {
            let start = Instant::now();
            let extra = RationalVector::new(vec![qr(1, m); n]);
            let expected = Q::from_integer((n as i64).pow(n as u32).into()) / q(m);
            let built = Lattice::generated_by(n, &[extra]).and_then(|lat| {
                let gens: Vec<_> = (0..n).map(|i| RationalVector::unit(n, i)).collect();
                ToricCone::new(Cone::new(n, &gens)?, lat, BTreeMap::new())
            });
            match built.and_then(|tc| {
                Ok((
                    minimize_nvol(&tc, &qr(1, 1_000_000))?,
                    nvol_xi(&tc, &RationalVector::from_ints(&vec![1; n]))?,
                ))
            }) {
                Ok((min, at_one)) => {
                    t.check(min.simplicial_exact && min.upper == expected, || {
                        format!("n={n}, m={m}: minimum {} ≠ {}", fmt_q(&min.upper), fmt_q(&expected))
                    });
                    t.check(at_one == NvolValue::Finite(expected.clone()), || {
                        format!("n={n}, m={m}: nvol(1,…,1) = {at_one:?}")
                    });
                }
                Err(e) => t.fail(format!("n={n}, m={m}: {e}")),
            }
            let el = start.elapsed();
            slowest = slowest.max(el);
            t.check(el < Duration::from_secs(1), || {
                format!("n={n}, m={m} took {} ms", el.as_millis())
            });
        }
    }
    format!("12 cases equal nⁿ/m, slowest {} ms", slowest.as_millis())
}

fn toric_example(_: &SelftestOptions, t: &mut Tally) -> String {
    let cone = Cone::from_ints(3, &[&[0, 0, 1], &[0, 2, 1], &[1, 0, 0]]).expect("rank 3");
    let tc = ToricCone::plain(cone).expect("pointed");
    let xi = RationalVector::from_ints(&[1, 2, 2]);
    let value = qr(27, 2);
    match minimize_nvol(&tc, &qr(1, 1_000_000_000)) {
        Ok(r) => {
            t.check(r.simplicial_exact, || "fast path not taken".into());
            t.check(r.xi_star == xi, || format!("fast path ξ* = {}", r.xi_star));
            t.check(r.upper == value && r.lower == value, || {
                format!("fast path value {}", fmt_q(&r.upper))
            });
        }
        Err(e) => t.fail(format!("fast path: {e}")),
    }
    let mut dir_err = f64::NAN;
    match minimize_nvol_numeric(&tc, &qr(1, 1_000_000_000)) {
        Ok(r) => {
            let exact: Vec<f64> = {
                let v = xi.to_f64();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| x / n).collect()
            };
            dir_err = r
                .direction()
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            t.check(dir_err < 1e-6, || format!("numeric direction off by {dir_err:e}"));
            t.check(r.lower <= value && value <= r.upper, || {
                format!(
                    "numeric enclosure [{}, {}] misses 27/2",
                    fmt_q(&r.lower),
                    fmt_q(&r.upper)
                )
            });
        }
        Err(e) => t.fail(format!("numeric path: {e}")),
    }
    let (h, _) = running_quadric();
    match (nvol_multigraded(&h, &xi), h.weights_at(&xi)) {
        (Ok(v), Ok(ws)) => {
            t.check(v == value, || format!("multigraded nvol {}", fmt_q(&v)));
            let expected = WeightSystem::from_ints(&[2, 2, 2, 1], 4).expect("positive");
            t.check(ws == expected, || format!("induced weights {ws}"));
        }
        (Err(e), _) | (_, Err(e)) => t.fail(format!("multigraded: {e}")),
    }
    format!("ξ* = (1,2,2), nvol = 27/2 on both paths, numeric direction error {dir_err:.1e}, weights (2,2,2,1;4)")
}

/// A point in the interior of the coefficient at `z`.
fn interior_point(d: &PDivisor, z: &str, rng: &mut ChaCha8Rng) -> RationalVector {
    let p = d.coefficient(z);
    let vs = p.vertices();
    let cnt = Q::from_integer((vs.len() as i64).into());
    let bary = vs
        .iter()
        .fold(RationalVector::zeros(d.rank()), |acc, v| &acc + v)
        .scale(&(Q::one() / cnt));
    d.tail().rays().iter().fold(bary, |acc, r| {
        acc.add_scaled(&qr(rng.gen_range(1..=6), rng.gen_range(1..=4)), r)
    })
}

/// A random lattice vector in the interior of the tail.
fn tail_vector(d: &PDivisor, rng: &mut ChaCha8Rng) -> RationalVector {
    let v = d.tail().rays().iter().fold(RationalVector::zeros(d.rank()), |acc, r| {
        acc.add_scaled(&q(rng.gen_range(1..=4)), r)
    });
    d.lattice().primitive_generator(&v)
}

/// A canonical divisor concentrated on the last stored label.
fn alternative_canonical(d: &PDivisor) -> BTreeMap<String, i64> {
    let y = d.labels().last().cloned().unwrap_or_else(|| "__k1".to_string());
    [(y, -2)].into_iter().collect()
}

fn discrepancy_suite(opts: &SelftestOptions, t: &mut Tally) -> String {
    let suite = random_suite(opts.seed, opts.instances);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let (mut prime, mut toric, mut linear, mut invariant) = (0, 0, 0, 0);
    for (i, (d, delta)) in suite.iter().enumerate() {
        let g = match solve_gorenstein(d, delta) {
            Ok(g) => g,
            Err(e) => {
                t.fail(format!("#{i}: {e}"));
                continue;
            }
        };
        let g2 = solve_gorenstein_with(d, delta, &alternative_canonical(d));
        let mut specs = prime_divisors(d);
        for p in &specs {
            let c = boundary_coefficient(delta, p);
            match log_discrepancy(&g, d, delta, p) {
                Ok(a) => t.check(a == Q::one() - &c, || {
                    format!("#{i} {p}: a = {} but 1 − c = {}", fmt_q(&a), fmt_q(&(Q::one() - &c)))
                }),
                Err(e) => t.fail(format!("#{i} {p}: {e}")),
            }
            prime += 1;
        }
        let labels: Vec<String> = d.labels().cloned().collect();
        for j in 0..3 {
            let z = &labels[j % labels.len()];
            let w = interior_point(d, z, &mut rng);
            match toric_crosscheck(d, delta, z, &w) {
                Ok((a, b)) => t.check(a == b, || format!("#{i} D_({z},{w}): {} vs {}", fmt_q(&a), fmt_q(&b))),
                Err(e) => t.fail(format!("#{i} crosscheck D_({z},{w}): {e}")),
            }
            toric += 1;
            specs.push(DivisorSpec::Vertical { point: z.clone(), w });
        }
        for _ in 0..3 {
            let (r1, r2) = (tail_vector(d, &mut rng), tail_vector(d, &mut rng));
            let (l1, l2) = (
                qr(rng.gen_range(1..=5), rng.gen_range(1..=3)),
                qr(rng.gen_range(1..=5), rng.gen_range(1..=3)),
            );
            match horizontal_linearity_check(&g, d, delta, &r1, &r2, &l1, &l2) {
                Ok(c) => t.check(c.lhs == c.rhs, || format!("#{i} linearity on {r1}, {r2}")),
                Err(e) => t.fail(format!("#{i} linearity on {r1}, {r2}: {e}")),
            }
            linear += 1;
            specs.push(DivisorSpec::Horizontal(r1));
            specs.push(DivisorSpec::Horizontal(r2));
        }
        match g2 {
            Ok(g2) => {
                for p in &specs {
                    let (a1, a2) = (log_discrepancy(&g, d, delta, p), log_discrepancy(&g2, d, delta, p));
                    t.check(a1.is_ok() && a1 == a2, || {
                        format!("#{i} {p}: {a1:?} vs {a2:?} after moving K")
                    });
                    invariant += 1;
                }
            }
            Err(e) => t.fail(format!("#{i} alternative canonical divisor: {e}")),
        }
    }
    format!(
        "{} instances: {prime} prime divisors, {toric} toric cross-checks, {linear} linearity checks, {invariant} K-invariance checks",
        suite.len()
    )
}

/// Log discrepancies of the rays through all vertex-family sums, via the
/// Gorenstein form only.
fn family_ray_discrepancies(g: &GorensteinData, d: &PDivisor, delta: &Boundary) -> Vec<Q> {
    d.vertex_families(None)
        .map(|f| f.sum(d.rank()))
        .filter(|s| !s.is_zero())
        .filter_map(|s| log_discrepancy(g, d, delta, &DivisorSpec::Horizontal(s)).ok())
        .collect()
}

fn klt_platonic(opts: &SelftestOptions, t: &mut Tally) -> String {
    let mut instances = random_suite(opts.seed, opts.instances);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(4));
    instances.extend((0..opts.instances / 2).map(|_| random_qgorenstein(&mut rng, false)));
    instances.extend(type_2pq_suite().into_iter().map(|(_, d)| (d, Boundary::zero())));
    instances.extend(non_klt_suite().into_iter().map(|(_, d)| (d, Boundary::zero())));
    let (mut klt, mut non_klt) = (0, 0);
    for (i, (d, delta)) in instances.iter().enumerate() {
        let qp = d.quotient_pair(delta);
        let criterion = qp.b.values().all(|b| b < &Q::one()) && qp.degree < q(2);
        let is_klt = d.is_klt(delta);
        t.check(is_klt == criterion, || {
            format!("#{i}: is_klt = {is_klt} but b-criterion = {criterion}")
        });
        // Independent oracle: positivity of all log discrepancies of prime
        // divisors and of the rays through vertex-family sums.
        match solve_gorenstein(d, delta) {
            Ok(g) => {
                let mut values: Vec<Q> = prime_divisors(d)
                    .iter()
                    .filter_map(|p| log_discrepancy(&g, d, delta, p).ok())
                    .collect();
                values.extend(family_ray_discrepancies(&g, d, delta));
                let positive = values.iter().all(|a| a.is_positive());
                t.check(positive == is_klt, || {
                    format!(
                        "#{i} type {}: is_klt = {is_klt} but discrepancy positivity = {positive}",
                        d.type_triple()
                    )
                });
            }
            Err(e) => t.fail(format!("#{i}: {e}")),
        }
        if is_klt {
            klt += 1;
            t.check(d.type_triple().is_platonic(), || {
                format!("#{i}: klt of non-platonic type {}", d.type_triple())
            });
        } else {
            non_klt += 1;
        }
    }
    t.check(non_klt > 0, || "no non-klt instance was generated".into());
    format!(
        "{} instances ({klt} klt, {non_klt} not): criterion, discrepancy oracle and platonic types agree",
        instances.len()
    )
}

fn mld_witnesses(opts: &SelftestOptions, t: &mut Tally) -> String {
    let mut instances: Vec<(String, PDivisor, Boundary)> = random_suite(opts.seed, opts.instances)
        .into_iter()
        .enumerate()
        .map(|(i, (d, b))| (format!("random #{i}"), d, b))
        .collect();
    instances.extend(type_2pq_suite().into_iter().map(|(n, d)| (n, d, Boundary::zero())));
    instances.extend(
        type_2pq_boundary_suite()
            .into_iter()
            .map(|(n, d)| (n, d, Boundary::zero())),
    );
    let mut branches: BTreeMap<String, usize> = BTreeMap::new();
    for (name, d, delta) in &instances {
        let eps = delta.min_positive_coefficient();
        match mld_bound_witness(d, delta, &eps) {
            Ok(w) => {
                let dim = d.rank() as i64 + 1;
                let expected = match w.branch {
                    Branch::Vertical => q(2 * dim - 1),
                    Branch::Horizontal => q(2) / &eps,
                    Branch::MConstruction => q(156 * (dim - 1)),
                };
                t.check(w.bound == expected, || {
                    format!("{name}: bound {} ≠ {}", fmt_q(&w.bound), fmt_q(&expected))
                });
                t.check(w.certified, || {
                    format!("{name}: not certified: {}", w.diagnostics.join("; "))
                });
                t.check(w.discrepancy <= w.bound, || {
                    format!(
                        "{name}: discrepancy {} > bound {}",
                        fmt_q(&w.discrepancy),
                        fmt_q(&w.bound)
                    )
                });
                if name.starts_with('(') {
                    t.check(w.branch == Branch::MConstruction, || {
                        format!("{name}: branch {}", w.branch)
                    });
                }
                *branches.entry(w.branch.to_string()).or_default() += 1;
            }
            Err(e) => t.fail(format!("{name}: {e}")),
        }
    }
    let b: Vec<String> = branches.iter().map(|(k, v)| format!("{k} ×{v}")).collect();
    format!("{} certified witnesses ({})", instances.len(), b.join(", "))
}

fn lichnerowicz(opts: &SelftestOptions, t: &mut Tally) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(6));
    let h = qr(1, 1_000_000_000_000);
    let tol = qr(1, 100_000_000);
    let (mut tested, mut with_slack) = (0, 0);
    while tested < 50 {
        let n = rng.gen_range(2..=4usize);
        let w: Vec<i64> = (0..=n).map(|_| rng.gen_range(1..=7)).collect();
        let ws = WeightSystem::from_ints(&w, rng.gen_range(1..=14)).expect("positive");
        if !ws.index().is_positive() {
            continue;
        }
        tested += 1;
        let v0 = lichnerowicz_curve(&ws, &Q::zero()).expect("log terminal");
        let slack = Q::from_integer((n as i64).into()) * &ws.weights()[0] - ws.index();
        if slack.is_positive() {
            with_slack += 1;
            for j in 1..=20 {
                let s = qr(j, 4);
                let v = lichnerowicz_curve(&ws, &s).expect("log terminal");
                t.check(v >= v0, || format!("{ws}: nvol(v_{}) < nvol(v_0)", fmt_q(&s)));
            }
        }
        let fd = (lichnerowicz_curve(&ws, &h).expect("log terminal") - &v0) / &h;
        let closed = lichnerowicz_derivative(&ws).expect("log terminal");
        let err = (&fd - &closed).abs() / closed.abs().max(Q::one());
        t.check(err <= tol, || {
            format!("{ws}: difference quotient {} vs {}", to_f64(&fd), to_f64(&closed))
        });
        let unstable = lichnerowicz_unstable(&ws).expect("log terminal");
        t.check(unstable == slack.is_negative(), || {
            format!("{ws}: unstable = {unstable}, slack {}", fmt_q(&slack))
        });
    }
    let mut flagged = Vec::new();
    for k in 1..=10i64 {
        let ws = WeightSystem::from_ints(&[k, k, k, 2], 2 * k).expect("positive");
        let unstable = lichnerowicz_unstable(&ws).unwrap_or(false);
        let violated = ws.index() > Q::from_integer(3.into()) * &ws.weights()[0];
        t.check(unstable == (k >= 5) && unstable == violated, || {
            format!("k = {k}: unstable = {unstable}")
        });
        if unstable {
            flagged.push(k);
        }
    }
    format!(
        "50 weight systems ({with_slack} with slack) monotone and matching the closed derivative; (k,k,k,2;2k) unstable for k ∈ {flagged:?}"
    )
}

fn hypersurface_screen(_: &SelftestOptions, t: &mut Tally) -> String {
    let caps = ScreenCaps::degree(12);
    let (r, oracle) = match (screen(3, &q(16), caps), screen_bruteforce(3, &q(16), caps)) {
        (Ok(r), Ok(o)) => (r, o),
        (Err(e), _) | (_, Err(e)) => {
            t.fail(e.to_string());
            return "screen failed".into();
        }
    };
    for (ws, v) in [("(1,1,1,1;2)", q(16)), ("(1,1,2,3;4)", q(18))] {
        let found = r.candidates.iter().find(|c| c.weights.to_string() == ws);
        t.check(found.is_some_and(|c| c.nvol == v), || {
            format!("{ws} with nvol {} missing", fmt_q(&v))
        });
    }
    t.check(r.candidates == oracle.candidates, || {
        format!(
            "pruned list has {} entries, brute force {}",
            r.candidates.len(),
            oracle.candidates.len()
        )
    });
    for c in &r.candidates {
        t.check(check_conditions(&c.weights, &q(16)).all(), || {
            format!("{} fails the conditions", c.weights)
        });
    }
    format!(
        "{} candidates, identical to brute force ({} vs {} tuples visited)",
        r.candidates.len(),
        r.visited,
        oracle.visited
    )
}

fn degeneration(_: &SelftestOptions, t: &mut Tally) -> String {
    let report = match degeneration_family(10) {
        Ok(r) => r,
        Err(e) => {
            t.fail(e.to_string());
            return "family failed".into();
        }
    };
    t.check(report.xi_star == RationalVector::from_ints(&[1, 2, 2]), || {
        format!("ξ* = {}", report.xi_star)
    });
    for m in &report.members {
        let e = m.exponent;
        t.check(m.kernel_degree == RationalVector::from_ints(&[e as i64, 0, -2]), || {
            format!("e = {e}: degree {}", m.kernel_degree)
        });
        t.check(m.sigma_x_is_dual_of_ray, || {
            format!("e = {e}: Σ_X is not the dual of the ray")
        });
        t.check(m.obstruction.fires == (e > 4), || {
            format!("e = {e}: fires = {}", m.obstruction.fires)
        });
    }
    t.check(report.computed_threshold == Some(5), || {
        format!("computed threshold {:?}", report.computed_threshold)
    });
    // The tangent direction w⁴ of the n = 4 member, from the monomials of f.
    let (h, _) = running_quadric();
    match t1_support(&h, &[RationalVector::from_ints(&[4, 0, -2])], 6) {
        Ok(s) => {
            let has = s
                .iter()
                .any(|d| d.u == RationalVector::from_ints(&[4, 0, -2]) && d.monomials == vec![vec![0, 0, 0, 4]]);
            t.check(has, || "T¹ support misses w⁴ in degree (4,0,−2)".into());
        }
        Err(e) => t.fail(e.to_string()),
    }
    format!(
        "fires exactly for e > 4 (computed threshold {}; stated threshold {} in the indexing \"{}\")",
        report.computed_threshold.map_or("none".into(), |x| x.to_string()),
        report.stated_threshold,
        report.stated_indexing
    )
}

fn random_int_vector(rng: &mut ChaCha8Rng, rank: usize, bound: i64) -> RationalVector {
    RationalVector::from_ints(&(0..rank).map(|_| rng.gen_range(-bound..=bound)).collect::<Vec<_>>())
}

fn random_rational_vector(rng: &mut ChaCha8Rng, rank: usize) -> RationalVector {
    RationalVector::new(
        (0..rank)
            .map(|_| qr(rng.gen_range(-8..=8), rng.gen_range(1..=4)))
            .collect(),
    )
}

fn random_cone(rng: &mut ChaCha8Rng) -> (usize, Vec<RationalVector>, Cone) {
    loop {
        let r = rng.gen_range(1..=3);
        let gens: Vec<_> = (0..rng.gen_range(1..=4))
            .map(|_| random_int_vector(rng, r, 3))
            .collect();
        if let Ok(c) = Cone::new(r, &gens) {
            return (r, gens, c);
        }
    }
}

fn random_unimodular(rng: &mut ChaCha8Rng, rank: usize) -> Vec<RationalVector> {
    let mut m: Vec<RationalVector> = (0..rank).map(|i| RationalVector::unit(rank, i)).collect();
    for _ in 0..rng.gen_range(1..=6) {
        let (i, j) = (rng.gen_range(0..rank), rng.gen_range(0..rank));
        if i == j {
            continue;
        }
        if rng.gen_bool(0.3) {
            m.swap(i, j);
        } else {
            let row = m[i].add_scaled(&q(rng.gen_range(-2..=2)), &m[j]);
            m[i] = row;
        }
    }
    debug_assert!(det(&m).abs() == Q::one());
    m
}

fn kernel_properties(opts: &SelftestOptions, t: &mut Tally) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(9));
    let cases = opts.kernel_cases;
    for i in 0..cases {
        let (_, _, c) = random_cone(&mut rng);
        t.check(c.dual().dual() == c, || format!("dual involution, case {i}"));
    }
    for i in 0..cases {
        let (_, gens, c) = random_cone(&mut rng);
        let mut comb = || {
            gens.iter().fold(RationalVector::zeros(c.ambient()), |acc, g| {
                acc.add_scaled(&qr(rng.gen_range(0..=4), rng.gen_range(1..=3)), g)
            })
        };
        let (v, w) = (comb(), comb());
        match (c.face_sets(&v), c.face_sets(&w), c.face_sets(&(&v + &w))) {
            (Ok(fv), Ok(fw), Ok(fs)) => {
                let both: BTreeSet<_> = fv.intersection(&fw).cloned().collect();
                t.check(fs == both, || format!("𝐅-intersection, case {i}: v = {v}, v′ = {w}"));
            }
            _ => t.fail(format!("𝐅-intersection, case {i}: face sets undefined")),
        }
    }
    let tails = [
        Cone::zero(2),
        Cone::from_ints(2, &[&[1, 0], &[1, 2]]).expect("rank 2"),
        Cone::from_ints(2, &[&[1, 0]]).expect("rank 2"),
    ];
    for i in 0..cases {
        let tail = tails[i % tails.len()].clone();
        let mut poly = || {
            let pts: Vec<_> = (0..rng.gen_range(1..=4))
                .map(|_| random_rational_vector(&mut rng, 2))
                .collect();
            Polyhedron::new(&pts, tail.clone()).expect("nonempty")
        };
        let (a, b, c) = (poly(), poly(), poly());
        let sums = (|| -> fcl_core::Result<bool> {
            let ab = a.minkowski_sum(&b)?;
            Ok(ab == b.minkowski_sum(&a)? && ab.minkowski_sum(&c)? == a.minkowski_sum(&b.minkowski_sum(&c)?)?)
        })();
        t.check(matches!(sums, Ok(true)), || {
            format!("Minkowski identities, case {i}: {sums:?}")
        });
    }
    for i in 0..cases {
        let r = rng.gen_range(2..=3);
        let pts: Vec<_> = (0..rng.gen_range(1..=7))
            .map(|_| random_rational_vector(&mut rng, r))
            .collect();
        let u = random_unimodular(&mut rng, r);
        let std = Lattice::standard(r);
        let moved: Vec<_> = pts
            .iter()
            .map(|p| RationalVector::new(u.iter().map(|row| row.dot(p)).collect()))
            .collect();
        let k = rng.gen_range(1..=3i64);
        let scaled: Vec<_> = pts.iter().map(|p| p.scale(&q(k))).collect();
        let res = (|| -> fcl_core::Result<bool> {
            let v = polytope_volume(&pts, &std)?;
            Ok(polytope_volume(&moved, &std)? == v
                && polytope_volume(&pts, &std.rebased(&u)?)? == v
                && polytope_volume(&scaled, &std)? == &v * pow(&q(k), r as u32))
        })();
        t.check(matches!(res, Ok(true)), || {
            format!("volume invariance, case {i}: {res:?}")
        });
    }
    format!("{cases} cases each: dual involution, 𝐅-intersection, Minkowski identities, volume lattice invariance")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_select_by_tag_and_number() {
        let f = Some("toric".to_string());
        let ids: Vec<u32> = CRITERIA.iter().filter(|c| selected(c, &f)).map(|c| c.id).collect();
        assert_eq!(ids, vec![1, 2]);
        let f = Some("7,kernel".to_string());
        let ids: Vec<u32> = CRITERIA.iter().filter(|c| selected(c, &f)).map(|c| c.id).collect();
        assert_eq!(ids, vec![7, 9]);
    }
}
