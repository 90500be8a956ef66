//! Triangulations and exact lattice-normalized volumes of polytopes.

use std::collections::BTreeSet;

use num_traits::Signed;

use super::lattice::Lattice;
use super::linalg::{det, rank};
use super::polyhedron::Polyhedron;
use super::rational::{factorial, Q};
use super::vector::RationalVector;
use crate::error::{Error, Result};

/// Affine dimension of a point set.
pub fn affine_dim(points: &[&RationalVector]) -> usize {
    match points.split_first() {
        None => 0,
        Some((p0, rest)) => {
            let diffs: Vec<RationalVector> = rest.iter().map(|p| *p - *p0).collect();
            if diffs.is_empty() {
                0
            } else {
                rank(&diffs)
            }
        }
    }
}

/// Pulling triangulation of a polytope: each face is triangulated by coning
/// its lowest-index vertex over the triangulations of the facets of that face
/// not containing it. Simplices are returned as sorted vertex-index sets into
/// `p.vertices()`.
pub fn pulling_triangulation(p: &Polyhedron) -> Result<Vec<Vec<usize>>> {
    if !p.is_bounded() {
        return Err(Error::Unbounded("cannot triangulate an unbounded polyhedron".into()));
    }
    let facets: Vec<BTreeSet<usize>> = p
        .facets()
        .iter()
        .map(|f| f.vertices.iter().copied().collect())
        .collect();
    let all: BTreeSet<usize> = (0..p.vertices().len()).collect();
    let d = p.dim();
    Ok(pull(p.vertices(), &all, d, &facets))
}

fn pull(verts: &[RationalVector], face: &BTreeSet<usize>, dim: usize, facets: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    if dim == 0 {
        return vec![face.iter().copied().take(1).collect()];
    }
    let apex = *face.iter().next().expect("faces are nonempty");
    let mut subfaces: Vec<BTreeSet<usize>> = Vec::new();
    for f in facets {
        let g: BTreeSet<usize> = face.intersection(f).copied().collect();
        if g.is_empty() || g.contains(&apex) || subfaces.contains(&g) {
            continue;
        }
        let pts: Vec<&RationalVector> = g.iter().map(|&i| &verts[i]).collect();
        if affine_dim(&pts) + 1 == dim {
            subfaces.push(g);
        }
    }
    let mut out = Vec::new();
    for g in subfaces {
        for mut s in pull(verts, &g, dim - 1, facets) {
            s.push(apex);
            s.sort_unstable();
            out.push(s);
        }
    }
    out
}

/// Euclidean volume of a full-dimensional simplex given by `n+1` points.
pub fn simplex_volume(points: &[&RationalVector]) -> Q {
    let n = points[0].rank();
    let rows: Vec<RationalVector> = points[1..].iter().map(|p| *p - points[0]).collect();
    det(&rows).abs() / Q::from_integer(factorial(n))
}

/// Volume of `conv(points)` normalized so that a fundamental domain of `lat`
/// has volume 1. Lower-dimensional polytopes have volume 0.
pub fn polytope_volume(points: &[RationalVector], lat: &Lattice) -> Result<Q> {
    let p = Polyhedron::polytope(points)?;
    if p.rank() != lat.rank() {
        return Err(Error::Dimension {
            expected: lat.rank(),
            got: p.rank(),
        });
    }
    if p.dim() < p.rank() {
        return Ok(Q::from_integer(0.into()));
    }
    let simplices = pulling_triangulation(&p)?;
    let v = p.vertices();
    let total = simplices.iter().fold(Q::from_integer(0.into()), |acc, s| {
        let pts: Vec<&RationalVector> = s.iter().map(|&i| &v[i]).collect();
        acc + simplex_volume(&pts)
    });
    Ok(total / lat.covolume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rational::{q, qr};
    use crate::rv;

    #[test]
    fn unit_simplices() {
        for n in 1..=4usize {
            let mut pts = vec![RationalVector::zeros(n)];
            pts.extend((0..n).map(|i| RationalVector::unit(n, i)));
            let v = polytope_volume(&pts, &Lattice::standard(n)).unwrap();
            assert_eq!(v, Q::new(1.into(), factorial(n)));
        }
    }

    #[test]
    fn cube_in_finer_lattice() {
        let mut pts = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    pts.push(rv![a, b, c]);
                }
            }
        }
        let half = RationalVector::new(vec![qr(1, 2), qr(1, 2), q(0)]);
        let l = Lattice::generated_by(3, &[half]).unwrap();
        assert_eq!(polytope_volume(&pts, &l).unwrap(), q(2));
        assert_eq!(polytope_volume(&pts, &Lattice::standard(3)).unwrap(), q(1));
    }

    #[test]
    fn truncated_dual_of_example_cone() {
        // Dual cone rays (1,0,0),(0,1,0),(0,-1,2) cut by <u,(1,2,2)> <= 1.
        let pts = vec![
            rv![0, 0, 0],
            rv![1, 0, 0],
            RationalVector::new(vec![q(0), qr(1, 2), q(0)]),
            RationalVector::new(vec![q(0), qr(-1, 2), q(1)]),
        ];
        assert_eq!(polytope_volume(&pts, &Lattice::standard(3)).unwrap(), qr(1, 12));
    }

    #[test]
    fn octahedron_volume() {
        let pts = vec![
            rv![1, 0, 0],
            rv![-1, 0, 0],
            rv![0, 1, 0],
            rv![0, -1, 0],
            rv![0, 0, 1],
            rv![0, 0, -1],
        ];
        assert_eq!(polytope_volume(&pts, &Lattice::standard(3)).unwrap(), qr(4, 3));
    }

    #[test]
    fn flat_polytope_has_zero_volume() {
        let pts = vec![rv![0, 0], rv![1, 1], rv![2, 2]];
        assert_eq!(polytope_volume(&pts, &Lattice::standard(2)).unwrap(), q(0));
    }
}
