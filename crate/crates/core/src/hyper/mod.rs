//! Weighted-homogeneous hypersurface singularities: normalized volumes, the
//! boundedness conditions, the Lichnerowicz curve, candidate screening and
//! degeneration-cone obstructions.

mod degeneration;
mod multigraded;
mod screen;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgeom::rational::{parse_q, pow, qserde};
use crate::exactgeom::{fmt_q, Q};

pub use degeneration::{
    acting_subspace, degeneration_cone, degeneration_family, kss_obstruction, running_quadric, DegenerationConeData,
    DegenerationFamilyReport, FamilyMember, ObstructionReport, FAMILY_STATED_THRESHOLD,
};
pub use multigraded::{
    minimize_multigraded, nvol_multigraded, t1_support, MultigradedHypersurface, MultigradedMinimum, T1Degree,
};
pub use screen::{screen, screen_bruteforce, Candidate, ScreenCaps, ScreenResult};

/// Weight data `(w₀ ≤ … ≤ wₙ; d)` of a quasi-homogeneous hypersurface in `C^{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeightSystem {
    #[serde(with = "qvec")]
    weights: Vec<Q>,
    #[serde(with = "qserde")]
    degree: Q,
}

mod qvec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exactgeom::rational::qserde;
    use crate::exactgeom::Q;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "qserde")] Q);

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| Wrap(x.clone())).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

impl WeightSystem {
    /// Sorts the weights; all entries must be positive and there must be at
    /// least two variables.
    pub fn new(mut weights: Vec<Q>, degree: Q) -> Result<WeightSystem> {
        if weights.len() < 2 {
            return Err(Error::Invalid("a hypersurface needs at least two variables".into()));
        }
        if weights.iter().any(|w| !w.is_positive()) || !degree.is_positive() {
            return Err(Error::Invalid("weights and degree must be positive".into()));
        }
        weights.sort();
        Ok(WeightSystem { weights, degree })
    }

    pub fn from_ints(weights: &[i64], degree: i64) -> Result<WeightSystem> {
        WeightSystem::new(
            weights.iter().map(|&w| Q::from_integer(w.into())).collect(),
            Q::from_integer(degree.into()),
        )
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn degree(&self) -> &Q {
        &self.degree
    }

    /// Dimension `n` of the hypersurface.
    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    /// Log-Fano index `Σwᵢ − d`, the log discrepancy of the weight valuation.
    pub fn index(&self) -> Q {
        self.weights.iter().fold(Q::zero(), |acc, w| acc + w) - &self.degree
    }

    /// Rescaled so that `w₀ = 1`.
    pub fn normalized(&self) -> WeightSystem {
        let s = Q::one() / &self.weights[0];
        WeightSystem {
            weights: self.weights.iter().map(|w| w * &s).collect(),
            degree: &self.degree * &s,
        }
    }

    /// Integer weights with `gcd(w, d) = 1`.
    pub fn reduced(&self) -> WeightSystem {
        let mut l = self.degree.denom().clone();
        for w in &self.weights {
            l = num_integer::Integer::lcm(&l, w.denom());
        }
        let lq = Q::from_integer(l);
        let ints: Vec<Q> = self.weights.iter().map(|w| w * &lq).collect();
        let d = &self.degree * &lq;
        let g = ints
            .iter()
            .fold(d.numer().clone(), |g, w| num_integer::Integer::gcd(&g, w.numer()));
        let gq = Q::from_integer(g);
        WeightSystem {
            weights: ints.iter().map(|w| w / &gq).collect(),
            degree: d / gq,
        }
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(fmt_q).collect();
        write!(f, "({};{})", w.join(","), fmt_q(&self.degree))
    }
}

/// Parses `(w₀,…,wₙ;d)`; the parentheses are optional.
impl FromStr for WeightSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<WeightSystem> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (w, d) = t
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("weight system {s:?} needs the form (w0,...,wn;d)")))?;
        let weights = w.split(',').map(|x| parse_q(x.trim())).collect::<Result<Vec<_>>>()?;
        WeightSystem::new(weights, parse_q(d.trim())?)
    }
}

/// `nvol = d(Σw − d)ⁿ / Πw` for a quasi-homogeneous hypersurface.
pub fn nvol_weighted(ws: &WeightSystem) -> Result<Q> {
    nvol_ci(ws.weights(), std::slice::from_ref(ws.degree()))
}

/// `nvol = Π dⱼ (Σw − Σd)ⁿ / Πw` for a quasi-homogeneous complete intersection
/// of codimension `k` in `C^{n+k}`.
pub fn nvol_ci(weights: &[Q], degrees: &[Q]) -> Result<Q> {
    if degrees.is_empty() || weights.len() <= degrees.len() {
        return Err(Error::Invalid("need more variables than equations".into()));
    }
    if weights.iter().chain(degrees).any(|x| !x.is_positive()) {
        return Err(Error::Invalid("weights and degrees must be positive".into()));
    }
    let n = (weights.len() - degrees.len()) as u32;
    let sum_w = weights.iter().fold(Q::zero(), |acc, w| acc + w);
    let sum_d = degrees.iter().fold(Q::zero(), |acc, d| acc + d);
    let index = sum_w - sum_d;
    if !index.is_positive() {
        return Err(Error::NotKlt(format!(
            "log-Fano index Σw − Σd = {} is not positive",
            fmt_q(&index)
        )));
    }
    let prod_d = degrees.iter().fold(Q::one(), |acc, d| acc * d);
    let prod_w = weights.iter().fold(Q::one(), |acc, w| acc * w);
    Ok(prod_d * pow(&index, n) / prod_w)
}

/// The four boundedness conditions on a weight system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conditions {
    /// `Σw − d > 0`.
    pub log_terminal: bool,
    /// `Σw − d ≤ n·w₀`.
    pub lichnerowicz: bool,
    /// `w₀ + wₙ ≤ d`: every variable appears in a non-linear monomial.
    pub nondegenerate: bool,
    /// `nvol ≥ v`.
    pub volume: bool,
    #[serde(with = "crate::exactgeom::rational::qserde_opt")]
    pub nvol: Option<Q>,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.log_terminal && self.lichnerowicz && self.nondegenerate && self.volume
    }
}

pub fn check_conditions(ws: &WeightSystem, v: &Q) -> Conditions {
    let index = ws.index();
    let n = Q::from_integer((ws.dim() as i64).into());
    let w0 = &ws.weights()[0];
    let wn = &ws.weights()[ws.dim()];
    let log_terminal = index.is_positive();
    let nvol = if log_terminal { nvol_weighted(ws).ok() } else { None };
    Conditions {
        log_terminal,
        lichnerowicz: index <= n * w0,
        nondegenerate: w0 + wn <= *ws.degree(),
        volume: nvol.as_ref().is_some_and(|x| x >= v),
        nvol,
    }
}

/// `nvol(v_s) = d(Σw − d + s)ⁿ / ((w₀ + s)w₁⋯wₙ)`: the weight valuation with
/// the smallest weight raised by `s`.
pub fn lichnerowicz_curve(ws: &WeightSystem, s: &Q) -> Result<Q> {
    if s.is_negative() {
        return Err(Error::Invalid("the curve parameter must be nonnegative".into()));
    }
    let mut w = ws.weights().to_vec();
    w[0] += s;
    nvol_ci(&w, std::slice::from_ref(ws.degree()))
}

/// Closed-form `d/ds nvol(v_s)` at `s = 0`: `nvol · (n/(Σw − d) − 1/w₀)`.
/// It is negative exactly when `Σw − d > n·w₀`.
pub fn lichnerowicz_derivative(ws: &WeightSystem) -> Result<Q> {
    let v = nvol_weighted(ws)?;
    let n = Q::from_integer((ws.dim() as i64).into());
    Ok(&v * (n / ws.index() - Q::one() / &ws.weights()[0]))
}

/// Destabilization flag: the curve decreases at `s = 0`.
pub fn lichnerowicz_unstable(ws: &WeightSystem) -> Result<bool> {
    Ok(lichnerowicz_derivative(ws)?.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr};

    fn ws(w: &[i64], d: i64) -> WeightSystem {
        WeightSystem::from_ints(w, d).unwrap()
    }

    #[test]
    fn volumes() {
        assert_eq!(nvol_weighted(&ws(&[1, 1, 1, 1], 2)).unwrap(), q(16));
        assert_eq!(nvol_weighted(&ws(&[1, 1, 1, 2], 2)).unwrap(), q(27));
        let ones = vec![q(1); 5];
        assert_eq!(nvol_ci(&ones, &[q(2), q(2)]).unwrap(), q(4));
        assert!(nvol_weighted(&ws(&[1, 1, 1], 3)).is_err());
    }

    #[test]
    fn conditions() {
        let c = check_conditions(&ws(&[1, 1, 1, 1], 2), &q(16));
        assert!(c.all());
        let c = check_conditions(&ws(&[1, 1, 2, 3], 4), &q(16));
        assert!(c.all());
        assert_eq!(c.nvol, Some(q(18)));
        let c = check_conditions(&ws(&[1, 1, 1, 2], 3), &q(16));
        assert!(c.log_terminal && c.lichnerowicz && c.nondegenerate && !c.volume);
        assert_eq!(c.nvol, Some(q(12)));
    }

    #[test]
    fn curve_and_derivative() {
        let a = ws(&[1, 1, 1, 1], 2);
        assert_eq!(lichnerowicz_curve(&a, &q(0)).unwrap(), q(16));
        assert_eq!(lichnerowicz_curve(&a, &q(1)).unwrap(), q(27));
        let k5 = ws(&[5, 5, 5, 2], 10);
        assert!(lichnerowicz_unstable(&k5).unwrap());
        let k4 = ws(&[4, 4, 4, 2], 8);
        assert!(!lichnerowicz_unstable(&k4).unwrap());
    }

    #[test]
    fn parse_and_normalize() {
        let a: WeightSystem = "(2,4,6,8;12)".parse().unwrap();
        assert_eq!(a.to_string(), "(2,4,6,8;12)");
        assert_eq!(a.reduced().to_string(), "(1,2,3,4;6)");
        let b: WeightSystem = "3/2,3;6".parse().unwrap();
        assert_eq!(b.normalized().to_string(), "(1,2;4)");
        assert_eq!(b.index(), qr(-3, 2));
    }
}
