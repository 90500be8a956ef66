use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::{vertex_multiplicity, Label, PDivisor, TypeTriple};
use crate::exactgeom::RationalVector;

/// A choice of one vertex per stored coefficient (absent labels contribute
/// the origin implicitly).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct VertexFamily {
    pub choice: BTreeMap<Label, RationalVector>,
}

impl VertexFamily {
    pub fn sum(&self, rank: usize) -> RationalVector {
        self.choice
            .values()
            .fold(RationalVector::zeros(rank), |acc, v| &acc + v)
    }

    /// Multiplicities of the chosen vertices, padded to a triple.
    pub fn family_type(&self) -> TypeTriple {
        TypeTriple::from_multiplicities(
            self.choice
                .values()
                .map(|v| vertex_multiplicity(v).to_u64().unwrap_or(u64::MAX))
                .collect(),
        )
    }

    pub fn vertex(&self, y: &str) -> Option<&RationalVector> {
        self.choice.get(y)
    }
}

/// Enumerator over the Cartesian product of vertex sets in label order.
///
/// Families are indexed by a mixed-radix counter, so a range of indices can be
/// handed to independent workers via [`VertexFamilies::range`].
#[derive(Clone, Debug)]
pub struct VertexFamilies<'a> {
    d: &'a PDivisor,
    labels: Vec<&'a Label>,
    sizes: Vec<usize>,
    target: Option<RationalVector>,
    next: usize,
    end: usize,
}

impl<'a> VertexFamilies<'a> {
    pub(super) fn new(d: &'a PDivisor, target: Option<RationalVector>) -> Self {
        let labels: Vec<&Label> = d.coefficients().keys().collect();
        let sizes: Vec<usize> = labels.iter().map(|y| d.coefficients()[*y].vertices().len()).collect();
        let end = sizes.iter().product();
        VertexFamilies {
            d,
            labels,
            sizes,
            target,
            next: 0,
            end,
        }
    }

    /// Number of families before target filtering.
    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Restricts enumeration to indices in `start..end`.
    pub fn range(mut self, start: usize, end: usize) -> Self {
        self.next = start.min(self.total());
        self.end = end.min(self.total());
        self
    }

    /// The family with the given index (unfiltered).
    pub fn family_at(&self, mut index: usize) -> VertexFamily {
        let mut choice = BTreeMap::new();
        for (k, y) in self.labels.iter().enumerate().rev() {
            let i = index % self.sizes[k];
            index /= self.sizes[k];
            choice.insert((*y).clone(), self.d.coefficients()[*y].vertices()[i].clone());
        }
        VertexFamily { choice }
    }

    fn accepts(&self, f: &VertexFamily) -> bool {
        match &self.target {
            None => true,
            Some(t) => f.sum(self.d.rank()).same_ray(t),
        }
    }
}

impl Iterator for VertexFamilies<'_> {
    type Item = VertexFamily;

    fn next(&mut self) -> Option<VertexFamily> {
        while self.next < self.end {
            let f = self.family_at(self.next);
            self.next += 1;
            if self.accepts(&f) {
                return Some(f);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr, Cone};
    use crate::rv;

    fn even2() -> PDivisor {
        PDivisor::from_vertices(
            Cone::from_ints(2, &[&[1, 0], &[1, 4]]).unwrap(),
            &[
                ("0", vec![rv![0, 0], rv![0, 1]]),
                ("1", vec![rv![0, 0], rv![0, 1]]),
                ("∞", vec![RationalVector::new(vec![qr(1, 2), q(0)])]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn counts_and_targets() {
        let d = even2();
        assert_eq!(d.vertex_families(None).count(), 4);
        let target = RationalVector::new(vec![qr(1, 2), q(1)]);
        let fams: Vec<_> = d.vertex_families(Some(&target)).collect();
        assert_eq!(fams.len(), 2);
        for f in &fams {
            assert_eq!(f.sum(2), target);
            assert_eq!(f.family_type(), TypeTriple::Typed([1, 1, 2]));
        }
    }

    #[test]
    fn ranges_partition() {
        let d = even2();
        let all: Vec<_> = d.vertex_families(None).collect();
        let mut parts: Vec<_> = d.vertex_families(None).range(0, 1).collect();
        parts.extend(d.vertex_families(None).range(1, 10));
        assert_eq!(all, parts);
    }

    #[test]
    fn family_sums_lie_in_degree() {
        let d = even2();
        for f in d.vertex_families(None) {
            assert!(d.degree().contains(&f.sum(2)));
        }
    }
}
