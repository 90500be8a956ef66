use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::rational::{fmt_q, q, qserde::QVisitor, to_f64, Q};
use crate::error::{Error, Result};

/// A vector of exact rationals in `Q^rank`.
///
/// Ordering is lexicographic on coordinates, which is what canonical forms of
/// cones and polyhedra sort by.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct RationalVector(Vec<Q>);

impl RationalVector {
    pub fn new(coords: Vec<Q>) -> Self {
        RationalVector(coords)
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RationalVector(v.iter().map(|&x| q(x)).collect())
    }

    pub fn zeros(rank: usize) -> Self {
        RationalVector(vec![Q::zero(); rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = Self::zeros(rank);
        v.0[i] = Q::one();
        v
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Q> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Q> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn dot(&self, other: &RationalVector) -> Q {
        debug_assert_eq!(self.rank(), other.rank());
        self.0.iter().zip(&other.0).fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scale(&self, s: &Q) -> RationalVector {
        RationalVector(self.0.iter().map(|x| x * s).collect())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: &Q, other: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    /// Appends a coordinate.
    pub fn extend(&self, last: Q) -> RationalVector {
        let mut c = self.0.clone();
        c.push(last);
        RationalVector(c)
    }

    /// Drops the last coordinate.
    pub fn truncate_last(&self) -> RationalVector {
        RationalVector(self.0[..self.0.len() - 1].to_vec())
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// The primitive integer vector on the ray spanned by `self` (standard
    /// lattice). Zero maps to zero.
    pub fn primitive(&self) -> RationalVector {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.denominator_lcm();
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|x| (x * Q::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        RationalVector(ints.into_iter().map(|x| Q::from_integer(x / &g)).collect())
    }

    /// True if `self` is a positive multiple of `other` (both nonzero).
    pub fn same_ray(&self, other: &RationalVector) -> bool {
        !self.is_zero() && !other.is_zero() && self.primitive() == other.primitive()
    }

    /// First nonzero coordinate is positive.
    pub fn is_lex_positive(&self) -> bool {
        self.0.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_positive())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    /// Coordinates as `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(fmt_q).collect()
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        if self.rank() == rank {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: rank,
                got: self.rank(),
            })
        }
    }
}

impl From<Vec<Q>> for RationalVector {
    fn from(v: Vec<Q>) -> Self {
        RationalVector(v)
    }
}

impl Index<usize> for RationalVector {
    type Output = Q;
    fn index(&self, i: usize) -> &Q {
        &self.0[i]
    }
}

impl Add for &RationalVector {
    type Output = RationalVector;
    fn add(self, o: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RationalVector {
    type Output = RationalVector;
    fn sub(self, o: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &RationalVector {
    type Output = RationalVector;
    fn neg(self) -> RationalVector {
        RationalVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", fmt_q(x))?;
        }
        write!(f, ")")
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for x in &self.0 {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct VecVisitor;
        impl<'de> Visitor<'de> for VecVisitor {
            type Value = RationalVector;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of exact rationals")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<RationalVector, A::Error> {
                let mut out = Vec::new();
                while let Some(Elem(x)) = seq.next_element()? {
                    out.push(x);
                }
                if out.is_empty() {
                    return Err(de::Error::custom("empty vector"));
                }
                Ok(RationalVector(out))
            }
        }
        struct Elem(Q);
        impl<'de> Deserialize<'de> for Elem {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                d.deserialize_any(QVisitor).map(Elem)
            }
        }
        d.deserialize_seq(VecVisitor)
    }
}

/// Shorthand for building vectors in tests and examples: `rv![1, 2, 0]`.
#[macro_export]
macro_rules! rv {
    ($($x:expr),* $(,)?) => {
        $crate::exactgeom::RationalVector::from_ints(&[$($x as i64),*])
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::qr;

    #[test]
    fn primitive_of_rational_vector() {
        let v = RationalVector::new(vec![qr(3, 2), q(3)]);
        assert_eq!(v.primitive(), RationalVector::from_ints(&[1, 2]));
        let w = RationalVector::from_ints(&[-4, 6]);
        assert_eq!(w.primitive(), RationalVector::from_ints(&[-2, 3]));
    }

    #[test]
    fn serde_roundtrip_accepts_ints_and_strings() {
        let v: RationalVector = serde_json::from_str(r#"[1, "-1/2", "3"]"#).unwrap();
        assert_eq!(v, RationalVector::new(vec![q(1), qr(-1, 2), q(3)]));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1","-1/2","3"]"#);
        assert!(serde_json::from_str::<RationalVector>("[1.5]").is_err());
    }
}
