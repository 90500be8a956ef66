use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{check_conditions, WeightSystem};
use crate::error::{Error, Result};
use crate::exactgeom::rational::{pow, qserde};
use crate::exactgeom::{fmt_q, Q};

/// Search caps; the boundedness statement gives no explicit bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScreenCaps {
    pub max_degree: u64,
    /// Defaults to `max_degree − 1`, which nondegeneracy never exceeds.
    pub max_weight: Option<u64>,
}

impl ScreenCaps {
    pub fn degree(max_degree: u64) -> ScreenCaps {
        ScreenCaps {
            max_degree,
            max_weight: None,
        }
    }

    fn weight_cap(&self) -> u64 {
        self.max_weight.unwrap_or(self.max_degree.saturating_sub(1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub weights: WeightSystem,
    #[serde(with = "qserde")]
    pub nvol: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScreenResult {
    pub dim: usize,
    #[serde(with = "qserde")]
    pub volume: Q,
    pub caps: ScreenCaps,
    /// Sorted by degree, then weights.
    pub candidates: Vec<Candidate>,
    /// Tuples whose conditions were evaluated.
    pub visited: u64,
    /// True when no candidate sits at the degree cap, i.e. the last degree
    /// level searched contributed nothing.
    pub quiet_at_cap: bool,
}

impl ScreenResult {
    pub fn contains(&self, ws: &str) -> bool {
        self.candidates.iter().any(|c| c.weights.to_string() == ws)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("weights,degree,nvol\n");
        for c in &self.candidates {
            let w: Vec<String> = c.weights.weights().iter().map(fmt_q).collect();
            out.push_str(&format!(
                "\"{}\",{},{}\n",
                w.join(","),
                fmt_q(c.weights.degree()),
                fmt_q(&c.nvol)
            ));
        }
        out
    }
}

fn check_request(n: usize, v: &Q, caps: &ScreenCaps) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    if !v.is_positive() {
        return Err(Error::Invalid("volume bound must be positive".into()));
    }
    if caps.max_degree == 0 {
        return Err(Error::Invalid("degree cap must be positive".into()));
    }
    Ok(())
}

fn finish(n: usize, v: &Q, caps: ScreenCaps, mut candidates: Vec<Candidate>, visited: u64) -> ScreenResult {
    candidates.sort_by(|a, b| {
        a.weights
            .degree()
            .cmp(b.weights.degree())
            .then_with(|| a.weights.weights().cmp(b.weights.weights()))
    });
    let cap = Q::from_integer(caps.max_degree.into());
    let quiet_at_cap = candidates.iter().all(|c| c.weights.degree() < &cap);
    ScreenResult {
        dim: n,
        volume: v.clone(),
        caps,
        candidates,
        visited,
        quiet_at_cap,
    }
}

fn accept(w: &[u64], d: u64, v: &Q, out: &mut Vec<Candidate>) {
    let g = w.iter().fold(d, |g, x| g.gcd(x));
    if g != 1 {
        return;
    }
    let ws =
        WeightSystem::from_ints(&w.iter().map(|&x| x as i64).collect::<Vec<_>>(), d as i64).expect("positive integers");
    let c = check_conditions(&ws, v);
    if c.all() {
        out.push(Candidate {
            weights: ws,
            nvol: c.nvol.expect("log terminal"),
        });
    }
}

/// Integer, gcd-reduced, sorted weight systems of dimension `n` within the
/// caps satisfying all four conditions with volume bound `v`.
///
/// Pruning uses `w₀ ≤ wᵢ ≤ d − w₀`, `0 < Σw − d ≤ n·w₀` and
/// `Πw / (d·w₀ⁿ) ≤ nⁿ/v` (from `nvol ≤ d(n·w₀)ⁿ/Πw`), all implied by the
/// conditions, so the output agrees with [`screen_bruteforce`].
pub fn screen(n: usize, v: &Q, caps: ScreenCaps) -> Result<ScreenResult> {
    check_request(n, v, &caps)?;
    let bound = pow(&Q::from_integer((n as i64).into()), n as u32) / v;
    let wcap = caps.weight_cap();
    let mut out = Vec::new();
    let mut visited = 0;
    let mut w = vec![0u64; n + 1];
    for d in 1..=caps.max_degree {
        for w0 in 1..=wcap.min(d / 2) {
            w[0] = w0;
            let limit = &bound * Q::from_integer(d.into()) * pow(&Q::from_integer(w0.into()), n as u32);
            rec(
                &mut w,
                1,
                d,
                w0,
                wcap.min(d - w0),
                &limit,
                Q::from_integer(w0.into()),
                w0,
                v,
                &mut out,
                &mut visited,
            );
        }
    }
    Ok(finish(n, v, caps, out, visited))
}

#[allow(clippy::too_many_arguments)]
fn rec(
    w: &mut Vec<u64>,
    i: usize,
    d: u64,
    w0: u64,
    top: u64,
    limit: &Q,
    prod: Q,
    sum: u64,
    v: &Q,
    out: &mut Vec<Candidate>,
    visited: &mut u64,
) {
    let n = w.len() - 1;
    if i == w.len() {
        // 0 < Σw − d ≤ n·w₀.
        if sum > d && sum - d <= n as u64 * w0 {
            *visited += 1;
            accept(w, d, v, out);
        }
        return;
    }
    let remaining = (w.len() - i) as u64;
    for x in w[i - 1]..=top {
        // The remaining weights are at least x.
        if sum + remaining * x > d + n as u64 * w0 {
            break;
        }
        let lower = &prod * pow(&Q::from_integer(x.into()), remaining as u32);
        if &lower > limit {
            break;
        }
        w[i] = x;
        rec(
            w,
            i + 1,
            d,
            w0,
            top,
            limit,
            &prod * Q::from_integer(x.into()),
            sum + x,
            v,
            out,
            visited,
        );
    }
}

/// Unpruned enumeration of every sorted tuple within the caps.
pub fn screen_bruteforce(n: usize, v: &Q, caps: ScreenCaps) -> Result<ScreenResult> {
    check_request(n, v, &caps)?;
    let wcap = caps.weight_cap();
    let mut out = Vec::new();
    let mut visited = 0;
    if wcap.is_zero() {
        return Ok(finish(n, v, caps, out, visited));
    }
    let mut w = vec![1u64; n + 1];
    loop {
        for d in 1..=caps.max_degree {
            visited += 1;
            accept(&w, d, v, &mut out);
        }
        // Next nondecreasing tuple.
        let mut i = n + 1;
        loop {
            if i == 0 {
                return Ok(finish(n, v, caps, out, visited));
            }
            i -= 1;
            if w[i] < wcap {
                let x = w[i] + 1;
                for y in &mut w[i..] {
                    *y = x;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::q;

    #[test]
    fn three_folds_of_volume_sixteen() {
        let r = screen(3, &q(16), ScreenCaps::degree(12)).unwrap();
        assert!(r.contains("(1,1,1,1;2)"));
        assert!(r.contains("(1,1,2,3;4)"));
        let oracle = screen_bruteforce(3, &q(16), ScreenCaps::degree(12)).unwrap();
        assert_eq!(r.candidates, oracle.candidates);
        assert!(r.visited < oracle.visited);
    }

    #[test]
    fn above_smooth_volume_is_empty() {
        let r = screen(3, &q(28), ScreenCaps::degree(12)).unwrap();
        assert!(r.candidates.is_empty());
        assert!(screen_bruteforce(3, &q(28), ScreenCaps::degree(12))
            .unwrap()
            .candidates
            .is_empty());
    }

    #[test]
    fn surfaces_agree_with_oracle() {
        let r = screen(2, &q(4), ScreenCaps::degree(8)).unwrap();
        let oracle = screen_bruteforce(2, &q(4), ScreenCaps::degree(8)).unwrap();
        assert_eq!(r.candidates, oracle.candidates);
        assert!(!r.contains("(1,1,1;2)"));
    }

    #[test]
    fn volume_bound_does_work() {
        let tiny = crate::exactgeom::qr(1, 1000);
        let a = screen(3, &tiny, ScreenCaps::degree(6)).unwrap().candidates.len();
        let b = screen(3, &tiny, ScreenCaps::degree(10)).unwrap().candidates.len();
        assert!(b > a);
        let c = screen(3, &q(16), ScreenCaps::degree(10)).unwrap().candidates.len();
        assert!(c < b);
    }
}
