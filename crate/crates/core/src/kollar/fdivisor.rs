use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::disc::DivisorSpec;
use crate::error::{Error, Result};
use crate::exactgeom::linalg::{solve, LinearSolution};
use crate::exactgeom::{fmt_q, Cone, Polyhedron, RationalVector, Q};
use crate::pdiv::{Label, PDivisor};

/// How a cell of a slice arises in the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CellSource {
    /// `v + σ_F` in the slice at `z`.
    Translate { cone: usize },
    /// `F_y + σ_F` for the Minkowski summand `F_y` of `F` in `D_y`.
    Summand { cone: usize },
    /// `conv(P ∪ {v})` for a facet `⟨normal, ·⟩ ≥ offset` of `D_z`.
    Pyramid { normal: RationalVector, offset: String },
    /// `F + ρ` for a facet `⟨normal, ·⟩ ≥ offset` of `D_y`.
    Star { normal: RationalVector, offset: String },
}

/// A full-dimensional cell of a slice subdivision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub polyhedron: Polyhedron,
    /// Index of its tail in the tail fan, when that tail is a maximal cone.
    pub cone: Option<usize>,
    pub source: CellSource,
}

/// An f-divisor `(Σ S_y · y, 𝔡)` given by its maximal cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FDivisor {
    pub rank: usize,
    /// Maximal cones of the tail fan.
    pub tailfan: Vec<Cone>,
    /// Primitive ray generators of the tail fan.
    pub rays: Vec<RationalVector>,
    pub slices: BTreeMap<Label, Vec<Cell>>,
    /// Maximal cones meeting the degree.
    pub marked: Vec<bool>,
    /// The degree `𝔡`, as a union of polyhedra.
    pub degree: Vec<Polyhedron>,
    /// Rays of the tail fan meeting the degree (these are not divisors).
    pub ray_in_degree: Vec<bool>,
    /// The unique exceptional prime divisor.
    pub exceptional: DivisorSpec,
    /// Linear part of the construction's support function on each maximal cone.
    pub supports: Vec<RationalVector>,
}

impl FDivisor {
    pub fn cell_count(&self) -> usize {
        self.slices.values().map(Vec::len).sum()
    }
}

fn parse_offset(s: &str) -> Q {
    crate::exactgeom::parse_q(s).expect("offset written by fmt_q")
}

/// Whether the ray `R≥0·r` meets `p`.
fn ray_meets(p: &Polyhedron, r: &RationalVector) -> bool {
    let (mut lo, mut hi): (Q, Option<Q>) = (Q::zero(), None);
    let tighten = |lo: &mut Q, hi: &mut Option<Q>, a: Q, b: &Q, eq: bool| -> bool {
        // Constraint t·a ≥ b (or = b).
        if a.is_zero() {
            return if eq { b.is_zero() } else { !b.is_positive() };
        }
        let t = b / &a;
        if eq {
            if t < *lo || hi.as_ref().is_some_and(|h| t > *h) {
                return false;
            }
            *lo = t.clone();
            *hi = Some(t);
        } else if a.is_positive() {
            if t > *lo {
                *lo = t;
            }
        } else if hi.as_ref().is_none_or(|h| t < *h) {
            *hi = Some(t);
        }
        true
    };
    for (e, b) in p.equations() {
        if !tighten(&mut lo, &mut hi, e.dot(r), b, true) {
            return false;
        }
    }
    for f in p.facets() {
        if !tighten(&mut lo, &mut hi, f.normal.dot(r), &f.offset, false) {
            return false;
        }
    }
    hi.is_none_or(|h| lo <= h)
}

fn fan_rays(cones: &[Cone]) -> Vec<RationalVector> {
    let set: BTreeSet<RationalVector> = cones
        .iter()
        .flat_map(|c| c.rays().iter().map(|r| r.primitive()))
        .collect();
    set.into_iter().collect()
}

/// The f-divisor `S(z, v)` extracting `D_{z,v}` for `v ∈ rint D_z`: the face
/// fan of `𝔡 = v + Σ_{y≠z} D_y`, the slices `F_y + σ_F` for `y ≠ z`, and
/// `v + σ_F` together with `conv(P ∪ {v})` at `z`.
pub fn fdivisor_vertical(d: &PDivisor, z: &str, v: &RationalVector) -> Result<FDivisor> {
    v.check_rank(d.rank())?;
    let dz = d.coefficient(z);
    if !dz.contains_relint(v) {
        return Err(Error::Precondition(format!(
            "{v} is not in the relative interior of D_{z}; the face fan degenerates"
        )));
    }
    let dfrak = d.degree_without(z).translate(v)?;
    let mut tailfan = Vec::new();
    let mut supports = Vec::new();
    for f in dfrak.facets() {
        if !f.offset.is_positive() {
            continue;
        }
        let mut gens: Vec<RationalVector> = f.vertices.iter().map(|&i| dfrak.vertices()[i].clone()).collect();
        gens.extend(f.tail_rays.iter().map(|&i| dfrak.tail().rays()[i].clone()));
        tailfan.push(Cone::new(d.rank(), &gens)?);
        supports.push(f.normal.scale(&(Q::one() / &f.offset)));
    }

    let mut slices = BTreeMap::new();
    for (y, p) in d.coefficients() {
        if y.as_str() == z {
            continue;
        }
        let mut cells = Vec::new();
        for (i, (sigma, u)) in tailfan.iter().zip(&supports).enumerate() {
            let (_, face) = p.min_face(u)?;
            cells.push(Cell {
                polyhedron: Polyhedron::new(&face, sigma.clone())?,
                cone: Some(i),
                source: CellSource::Summand { cone: i },
            });
        }
        slices.insert(y.clone(), cells);
    }
    let mut zcells = Vec::new();
    for (i, sigma) in tailfan.iter().enumerate() {
        zcells.push(Cell {
            polyhedron: Polyhedron::translated_cone(v, sigma.clone())?,
            cone: Some(i),
            source: CellSource::Translate { cone: i },
        });
    }
    for f in dz.facets() {
        let mut pts: Vec<RationalVector> = f.vertices.iter().map(|&i| dz.vertices()[i].clone()).collect();
        pts.push(v.clone());
        let tail_gens: Vec<RationalVector> = f.tail_rays.iter().map(|&i| dz.tail().rays()[i].clone()).collect();
        // A pyramid on which the piece agrees with an adjacent translate is
        // part of that cell's linearity region: merge the two.
        let s = f.normal.dot(v) - &f.offset;
        let u = f.normal.scale(&(Q::one() / &s));
        if let Some(i) = supports.iter().position(|x| *x == u) {
            let cell = &mut zcells[i];
            let mut all = cell.polyhedron.vertices().to_vec();
            all.extend(pts);
            cell.polyhedron = Polyhedron::new(&all, tailfan[i].clone())?;
            continue;
        }
        let tail = if tail_gens.is_empty() {
            Cone::zero(d.rank())
        } else {
            Cone::new(d.rank(), &tail_gens)?
        };
        zcells.push(Cell {
            polyhedron: Polyhedron::new(&pts, tail)?,
            cone: None,
            source: CellSource::Pyramid {
                normal: f.normal.clone(),
                offset: fmt_q(&f.offset),
            },
        });
    }
    slices.insert(z.to_string(), zcells);

    let rays = fan_rays(&tailfan);
    let ray_in_degree = rays.iter().map(|r| ray_meets(&dfrak, r)).collect();
    let marked = tailfan.iter().map(|_| true).collect();
    Ok(FDivisor {
        rank: d.rank(),
        tailfan,
        rays,
        slices,
        marked,
        degree: vec![dfrak],
        ray_in_degree,
        exceptional: DivisorSpec::Vertical {
            point: z.to_string(),
            w: v.clone(),
        },
        supports,
    })
}

/// The f-divisor `S(ρ)` extracting `D_ρ` for `ρ` through an interior point:
/// the star subdivision of the tail at `ρ` and the slices `F + ρ`.
pub fn fdivisor_horizontal(d: &PDivisor, n: &RationalVector) -> Result<FDivisor> {
    n.check_rank(d.rank())?;
    if !d.tail().is_interior_point(n) {
        return Err(Error::Precondition(format!(
            "{n} is not in the interior of the tail cone"
        )));
    }
    let n = d.lattice().primitive_generator(n);
    let tail = d.tail();
    let mut tailfan = Vec::new();
    let mut supports = Vec::new();
    let mut normals = Vec::new();
    for f in tail.facets() {
        let mut gens: Vec<RationalVector> = tail.rays().iter().filter(|r| f.dot(r).is_zero()).cloned().collect();
        gens.push(n.clone());
        tailfan.push(Cone::new(d.rank(), &gens)?);
        supports.push(f.scale(&(Q::one() / f.dot(&n))));
        normals.push(f.clone());
    }
    let cone_index = |c: &Cone| tailfan.iter().position(|t| t == c);

    let mut slices = BTreeMap::new();
    for (y, p) in d.coefficients() {
        let mut cells = Vec::new();
        for f in p.facets() {
            let pts: Vec<RationalVector> = f.vertices.iter().map(|&i| p.vertices()[i].clone()).collect();
            let mut gens: Vec<RationalVector> = f.tail_rays.iter().map(|&i| p.tail().rays()[i].clone()).collect();
            gens.push(n.clone());
            let cell_tail = Cone::new(d.rank(), &gens)?;
            cells.push(Cell {
                cone: cone_index(&cell_tail),
                polyhedron: Polyhedron::new(&pts, cell_tail)?,
                source: CellSource::Star {
                    normal: f.normal.clone(),
                    offset: fmt_q(&f.offset),
                },
            });
        }
        slices.insert(y.clone(), cells);
    }

    let mut marked = Vec::new();
    let mut degree = Vec::new();
    for (sigma, f) in tailfan.iter().zip(&normals) {
        let meets = d.degree().min_value(f)?.is_zero();
        marked.push(meets);
        if meets {
            let mut piece = Polyhedron::translated_cone(&RationalVector::zeros(d.rank()), sigma.clone())?;
            for p in d.coefficients().values() {
                let (_, face) = p.min_face(f)?;
                piece = piece.minkowski_sum(&Polyhedron::new(&face, sigma.clone())?)?;
            }
            degree.push(piece);
        }
    }
    let rays = fan_rays(&tailfan);
    let ray_in_degree = rays.iter().map(|r| degree.iter().any(|p| ray_meets(p, r))).collect();
    Ok(FDivisor {
        rank: d.rank(),
        tailfan,
        rays,
        slices,
        marked,
        degree,
        ray_in_degree,
        exceptional: DivisorSpec::Horizontal(n),
        supports,
    })
}

/// Support-function data certifying that `−E` (horizontal) or `−μ(v)E`
/// (vertical) is an ample Q-Cartier divisor on `X(S)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmpleCertificate {
    pub target: DivisorSpec,
    /// `h` at the primitive ray generators of the tail fan.
    #[serde(serialize_with = "ser_vec_map")]
    pub h: BTreeMap<RationalVector, Q>,
    /// `h_y` at the vertices of the slice cells.
    #[serde(serialize_with = "ser_nested")]
    pub h_y: BTreeMap<Label, BTreeMap<RationalVector, Q>>,
    /// `a^σ_y` for every maximal cone `σ`.
    #[serde(serialize_with = "ser_offsets")]
    pub offsets: Vec<BTreeMap<Label, Q>>,
}

fn ser_vec_map<S: serde::Serializer>(m: &BTreeMap<RationalVector, Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(&k.to_string(), &fmt_q(v))?;
    }
    map.end()
}

fn ser_nested<S: serde::Serializer>(
    m: &BTreeMap<Label, BTreeMap<RationalVector, Q>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, inner) in m {
        let inner: BTreeMap<String, String> = inner.iter().map(|(v, q)| (v.to_string(), fmt_q(q))).collect();
        map.serialize_entry(k, &inner)?;
    }
    map.end()
}

fn ser_offsets<S: serde::Serializer>(m: &[BTreeMap<Label, Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for o in m {
        let o: BTreeMap<&Label, String> = o.iter().map(|(k, v)| (k, fmt_q(v))).collect();
        seq.serialize_element(&o)?;
    }
    seq.end()
}

/// Outcome of a successful verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateSummary {
    pub maximal_cones: usize,
    pub marked_cones: usize,
    pub cells: usize,
    /// `Σ_y a^σ_y` per maximal cone.
    pub offset_sums: Vec<String>,
}

/// An affine function `⟨u, ·⟩ + a`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Affine {
    u: RationalVector,
    a: Q,
}

impl Affine {
    fn at(&self, x: &RationalVector) -> Q {
        self.u.dot(x) + &self.a
    }
}

/// The construction's affine function on a cell.
fn construction_piece(f: &FDivisor, cell: &Cell) -> Affine {
    let center = match &f.exceptional {
        DivisorSpec::Vertical { w, .. } => w.clone(),
        DivisorSpec::Horizontal(n) => n.clone(),
    };
    match &cell.source {
        CellSource::Translate { cone } => {
            let u = f.supports[*cone].clone();
            let a = Q::one() - u.dot(&center);
            Affine { u, a }
        }
        CellSource::Summand { cone } => {
            let u = f.supports[*cone].clone();
            let m = cell
                .polyhedron
                .vertices()
                .iter()
                .map(|p| u.dot(p))
                .min()
                .expect("nonempty");
            Affine { u, a: -m }
        }
        CellSource::Pyramid { normal, offset } => {
            let m = parse_offset(offset);
            let s = normal.dot(&center) - &m;
            Affine {
                u: normal.scale(&(Q::one() / &s)),
                a: -m / s,
            }
        }
        CellSource::Star { normal, offset } => {
            let m = parse_offset(offset);
            let s = normal.dot(&center);
            Affine {
                u: normal.scale(&(Q::one() / &s)),
                a: -m / s,
            }
        }
    }
}

/// Replays the support functions of the extraction proofs and verifies them.
pub fn ample_certificate(f: &FDivisor, target: &DivisorSpec) -> Result<AmpleCertificate> {
    if target != &f.exceptional {
        return Err(Error::Precondition(format!(
            "f-divisor extracts {} but the certificate target is {target}",
            f.exceptional
        )));
    }
    let mut h = BTreeMap::new();
    for r in &f.rays {
        let i = f
            .tailfan
            .iter()
            .position(|c| c.contains(r))
            .ok_or_else(|| Error::Certificate(format!("ray {r} lies in no maximal cone")))?;
        h.insert(r.clone(), f.supports[i].dot(r));
    }
    let mut h_y = BTreeMap::new();
    let mut offsets: Vec<BTreeMap<Label, Q>> = vec![BTreeMap::new(); f.tailfan.len()];
    for (y, cells) in &f.slices {
        let mut values = BTreeMap::new();
        for cell in cells {
            let piece = construction_piece(f, cell);
            for x in cell.polyhedron.vertices() {
                values.entry(x.clone()).or_insert_with(|| piece.at(x));
            }
            if let Some(i) = cell.cone {
                offsets[i].insert(y.clone(), piece.a.clone());
            }
        }
        h_y.insert(y.clone(), values);
    }
    let cert = AmpleCertificate {
        target: target.clone(),
        h,
        h_y,
        offsets,
    };
    cert.verify(f)?;
    Ok(cert)
}

fn fail(msg: String) -> Error {
    Error::Certificate(msg)
}

impl AmpleCertificate {
    /// Independent check: every affine piece is reconstructed from the stored
    /// values (vertex values plus `h` on the cell's tail rays, an
    /// overdetermined system), then linearity, offsets, concavity and the
    /// divisor's coefficients are checked.
    pub fn verify(&self, f: &FDivisor) -> Result<CertificateSummary> {
        let keys: Vec<&RationalVector> = self.h.keys().collect();
        if keys != f.rays.iter().collect::<Vec<_>>() {
            return Err(fail("h is not given on exactly the rays of the tail fan".into()));
        }
        let h_at = |r: &RationalVector| -> Result<Q> {
            self.h
                .get(&r.primitive())
                .cloned()
                .ok_or_else(|| fail(format!("h is not defined on ray {r}")))
        };

        // h is linear on each maximal cone, strictly concave on the fan.
        let n = f.rank;
        let mut linear = Vec::new();
        for (i, sigma) in f.tailfan.iter().enumerate() {
            let piece = reconstruct(n, &[], sigma, &h_at, false).map_err(|e| fail(format!("maximal cone {i}: {e}")))?;
            linear.push(piece.u);
        }
        for (i, u) in linear.iter().enumerate() {
            for r in &f.rays {
                let hr = h_at(r)?;
                if u.dot(r) < hr {
                    return Err(fail(format!(
                        "h is not concave: linear part on cone {i} gives {} < h({r}) = {}",
                        fmt_q(&u.dot(r)),
                        fmt_q(&hr)
                    )));
                }
            }
            if linear[..i].contains(u) {
                return Err(fail(format!(
                    "h is not strictly concave: cone {i} repeats a linear piece"
                )));
            }
        }

        let mut sums = vec![Q::zero(); f.tailfan.len()];
        let mut cells_checked = 0;
        for (y, cells) in &f.slices {
            let values = self
                .h_y
                .get(y)
                .ok_or_else(|| fail(format!("no values for the slice at {y:?}")))?;
            let mut pieces = Vec::new();
            for (k, cell) in cells.iter().enumerate() {
                let verts: Vec<(RationalVector, Q)> = cell
                    .polyhedron
                    .vertices()
                    .iter()
                    .map(|x| {
                        values
                            .get(x)
                            .cloned()
                            .map(|v| (x.clone(), v))
                            .ok_or_else(|| fail(format!("h_{y} is not given at vertex {x}")))
                    })
                    .collect::<Result<_>>()?;
                let piece = reconstruct(n, &verts, cell.polyhedron.tail(), &h_at, true)
                    .map_err(|e| fail(format!("slice {y:?}, cell {k}: {e}")))?;
                if let Some(i) = cell.cone {
                    let stored = self.offsets[i].get(y).cloned().unwrap_or_else(Q::zero);
                    if stored != piece.a {
                        return Err(fail(format!(
                            "offset a^σ_{y} on cone {i} is {} but the cell gives {}",
                            fmt_q(&stored),
                            fmt_q(&piece.a)
                        )));
                    }
                    sums[i] += &piece.a;
                }
                pieces.push(piece);
                cells_checked += 1;
            }
            for i in 0..f.tailfan.len() {
                let count = cells.iter().filter(|c| c.cone == Some(i)).count();
                if count != 1 {
                    return Err(fail(format!("slice {y:?} has {count} cells with tail cone {i}")));
                }
            }
            // Concavity via the min-representation.
            let tail_rays: BTreeSet<RationalVector> = cells
                .iter()
                .flat_map(|c| c.polyhedron.tail().rays().iter().map(|r| r.primitive()))
                .collect();
            for (k, p) in pieces.iter().enumerate() {
                for (x, hx) in values {
                    if &p.at(x) < hx {
                        return Err(fail(format!(
                            "h_{y} is not concave: cell {k} gives {} < h_{y}({x}) = {}",
                            fmt_q(&p.at(x)),
                            fmt_q(hx)
                        )));
                    }
                }
                for r in &tail_rays {
                    if p.u.dot(r) < h_at(r)? {
                        return Err(fail(format!("h_{y} is not concave along ray {r} (cell {k})")));
                    }
                }
                if pieces[..k].contains(p) {
                    return Err(fail(format!(
                        "h_{y} is not strictly concave: cell {k} repeats an affine piece"
                    )));
                }
            }
        }
        for (i, s) in sums.iter().enumerate() {
            let ok = if f.marked[i] { s.is_zero() } else { s.is_negative() };
            if !ok {
                let rel = if f.marked[i] { "= 0" } else { "< 0" };
                return Err(fail(format!("Σ_y a^σ_y = {} on cone {i}; required {rel}", fmt_q(s))));
            }
        }

        // The certified divisor is exactly −E (resp. −μ(v)E).
        for (r, meets) in f.rays.iter().zip(&f.ray_in_degree) {
            if *meets {
                continue;
            }
            let expected = match &self.target {
                DivisorSpec::Horizontal(m) if m.same_ray(r) => Q::one(),
                _ => Q::zero(),
            };
            if h_at(r)? != expected {
                return Err(fail(format!(
                    "h({r}) = {} but the divisor requires {}",
                    fmt_q(&h_at(r)?),
                    fmt_q(&expected)
                )));
            }
        }
        for (y, values) in &self.h_y {
            for (x, hx) in values {
                let expected = match &self.target {
                    DivisorSpec::Vertical { point, w } if point == y && w == x => Q::one(),
                    _ => Q::zero(),
                };
                if hx != &expected {
                    return Err(fail(format!(
                        "h_{y}({x}) = {} but the divisor requires {}",
                        fmt_q(hx),
                        fmt_q(&expected)
                    )));
                }
            }
        }
        Ok(CertificateSummary {
            maximal_cones: f.tailfan.len(),
            marked_cones: f.marked.iter().filter(|m| **m).count(),
            cells: cells_checked,
            offset_sums: sums.iter().map(fmt_q).collect(),
        })
    }
}

/// Solves for `(u, a)` with `⟨u, x⟩ + a = value` at the given points and
/// `⟨u, r⟩ = h(r)` on the rays of `tail` (no constant when `affine` is false).
fn reconstruct(
    n: usize,
    points: &[(RationalVector, Q)],
    tail: &Cone,
    h_at: &dyn Fn(&RationalVector) -> Result<Q>,
    affine: bool,
) -> std::result::Result<Affine, String> {
    let cols = if affine { n + 1 } else { n };
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (x, v) in points {
        rows.push(x.extend(Q::one()));
        rhs.push(v.clone());
    }
    for r in tail.rays() {
        let r = r.primitive();
        rows.push(if affine { r.extend(Q::zero()) } else { r.clone() });
        rhs.push(h_at(&r).map_err(|e| e.to_string())?);
    }
    match solve(&rows, &rhs, cols) {
        LinearSolution::Unique(x) => {
            let u = RationalVector::new(x.coords()[..n].to_vec());
            let a = if affine { x[n].clone() } else { Q::zero() };
            Ok(Affine { u, a })
        }
        LinearSolution::Inconsistent { .. } => Err("the values are not affine on it".into()),
        LinearSolution::Underdetermined { .. } => Err("it is not full-dimensional".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{q, qr};
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
    fn vertical_even_case() {
        let d = even2();
        let v = rv![1, 1];
        let f = fdivisor_vertical(&d, "∞", &v).unwrap();
        assert_eq!(f.tailfan.len(), 3);
        assert_eq!(f.rays, vec![rv![1, 0], rv![1, 1], rv![1, 3], rv![1, 4]]);
        let z = &f.slices["∞"];
        assert_eq!(
            z.iter()
                .filter(|c| matches!(c.source, CellSource::Translate { .. }))
                .count(),
            3
        );
        assert!(z
            .iter()
            .filter(|c| matches!(c.source, CellSource::Pyramid { .. }))
            .all(|c| c
                .polyhedron
                .vertices()
                .contains(&RationalVector::new(vec![qr(1, 2), q(0)]))));
        let target = DivisorSpec::Vertical {
            point: "∞".into(),
            w: v.clone(),
        };
        let cert = ample_certificate(&f, &target).unwrap();
        assert_eq!(cert.h_y["∞"][&v], q(1));
        let summary = cert.verify(&f).unwrap();
        assert!(summary.offset_sums.iter().all(|s| s == "0"));
    }

    #[test]
    fn horizontal_star_subdivision() {
        let d = even2();
        let f = fdivisor_horizontal(&d, &rv![1, 2]).unwrap();
        let mut cones = f.tailfan.clone();
        cones.sort_by_key(|c| c.rays().to_vec());
        assert_eq!(cones[0], Cone::from_ints(2, &[&[1, 0], &[1, 2]]).unwrap());
        assert_eq!(cones[1], Cone::from_ints(2, &[&[1, 2], &[1, 4]]).unwrap());
        let cert = ample_certificate(&f, &DivisorSpec::Horizontal(rv![1, 2])).unwrap();
        assert_eq!(cert.h[&rv![1, 2]], q(1));
        assert_eq!(cert.h[&rv![1, 0]], q(0));
    }

    #[test]
    fn trivial_divisor_is_toric_star() {
        let d = PDivisor::new(Cone::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap(), BTreeMap::new()).unwrap();
        let f = fdivisor_horizontal(&d, &rv![1, 1]).unwrap();
        assert!(f.slices.is_empty());
        assert_eq!(f.tailfan.len(), 2);
        ample_certificate(&f, &DivisorSpec::Horizontal(rv![1, 1])).unwrap();
    }

    #[test]
    fn tampered_certificate_fails() {
        let d = even2();
        let v = rv![1, 1];
        let f = fdivisor_vertical(&d, "∞", &v).unwrap();
        let mut cert = ample_certificate(
            &f,
            &DivisorSpec::Vertical {
                point: "∞".into(),
                w: v,
            },
        )
        .unwrap();
        let x = cert.h_y["0"].keys().next().unwrap().clone();
        cert.h_y.get_mut("0").unwrap().insert(x, qr(1, 7));
        assert!(matches!(cert.verify(&f), Err(Error::Certificate(_))));
    }

    #[test]
    fn boundary_point_rejected() {
        let d = even2();
        assert!(fdivisor_vertical(&d, "∞", &RationalVector::new(vec![qr(1, 2), q(0)])).is_err());
        assert!(fdivisor_horizontal(&d, &rv![1, 0]).is_err());
    }
}
