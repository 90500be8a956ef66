use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Boundary, PDivisor};
use crate::error::{Error, Result};
use crate::exactgeom::rational::qserde;
use crate::exactgeom::{Cone, Polyhedron, RationalVector, Q};

/// Wire format of a p-divisor with its boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PDivisorInput {
    pub rank: usize,
    pub tail: Vec<RationalVector>,
    pub coefficients: BTreeMap<String, CoefficientInput>,
    #[serde(default, skip_serializing_if = "BoundaryInput::is_empty")]
    pub boundary: BoundaryInput,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientInput {
    pub vertices: Vec<RationalVector>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryInput {
    #[serde(default)]
    pub horizontal: Vec<HorizontalEntry>,
    #[serde(default)]
    pub vertical: Vec<VerticalEntry>,
}

impl BoundaryInput {
    fn is_empty(&self) -> bool {
        self.horizontal.is_empty() && self.vertical.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizontalEntry {
    pub ray: RationalVector,
    #[serde(with = "qserde")]
    pub c: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerticalEntry {
    pub point: String,
    pub vertex: RationalVector,
    #[serde(with = "qserde")]
    pub c: Q,
}

impl PDivisorInput {
    pub fn build(&self) -> Result<(PDivisor, Boundary)> {
        if self.rank == 0 {
            return Err(Error::Invalid("rank must be positive".into()));
        }
        let tail = Cone::new(self.rank, &self.tail)?;
        let mut coefficients = BTreeMap::new();
        for (y, c) in &self.coefficients {
            if c.vertices.is_empty() {
                return Err(Error::Invalid(format!("coefficient at {y:?} has no vertices")));
            }
            coefficients.insert(y.clone(), Polyhedron::new(&c.vertices, tail.clone())?);
        }
        let d = PDivisor::new(tail, coefficients)?;
        let delta = Boundary::new(
            &d,
            self.boundary
                .horizontal
                .iter()
                .map(|h| (h.ray.clone(), h.c.clone()))
                .collect(),
            self.boundary
                .vertical
                .iter()
                .map(|v| (v.point.clone(), v.vertex.clone(), v.c.clone()))
                .collect(),
        )?;
        Ok((d, delta))
    }

    /// Canonical wire form of an existing divisor and boundary.
    pub fn from_parts(d: &PDivisor, delta: &Boundary) -> PDivisorInput {
        PDivisorInput {
            rank: d.rank(),
            tail: d.tail().rays().to_vec(),
            coefficients: d
                .coefficients()
                .iter()
                .map(|(y, p)| {
                    (
                        y.clone(),
                        CoefficientInput {
                            vertices: p.vertices().to_vec(),
                        },
                    )
                })
                .collect(),
            boundary: BoundaryInput {
                horizontal: delta
                    .horizontal()
                    .iter()
                    .map(|(r, c)| HorizontalEntry {
                        ray: r.clone(),
                        c: c.clone(),
                    })
                    .collect(),
                vertical: delta
                    .vertical()
                    .iter()
                    .map(|((y, v), c)| VerticalEntry {
                        point: y.clone(),
                        vertex: v.clone(),
                        c: c.clone(),
                    })
                    .collect(),
            },
        }
    }
}

/// Parses the JSON wire format. Syntax errors report line and column.
pub fn parse_pdiv_json(text: &str) -> Result<(PDivisor, Boundary)> {
    let input: PDivisorInput = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    input.build()
}

pub fn pdiv_to_json(d: &PDivisor, delta: &Boundary) -> serde_json::Value {
    serde_json::to_value(PDivisorInput::from_parts(d, delta)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::qr;

    const EVEN2: &str = r#"{
        "rank": 2,
        "tail": [[1,0],[1,4]],
        "coefficients": {
            "0": {"vertices": [[0,0],[0,1]]},
            "1": {"vertices": [[0,0],[0,1]]},
            "∞": {"vertices": [["1/2",0]]}
        },
        "boundary": {"vertical": [{"point": "∞", "vertex": ["1/2","0"], "c": "2/3"}]}
    }"#;

    #[test]
    fn parse_and_roundtrip() {
        let (d, delta) = parse_pdiv_json(EVEN2).unwrap();
        assert_eq!(d.coefficients().len(), 3);
        assert_eq!(d.quotient_pair(&delta).b["∞"], qr(5, 6));
        let v = pdiv_to_json(&d, &delta);
        let (d2, delta2) = parse_pdiv_json(&v.to_string()).unwrap();
        assert_eq!(d, d2);
        assert_eq!(delta, delta2);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_pdiv_json("{\"rank\": 2,\n \"tail\": [[1,0],]}").unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn floats_rejected() {
        let text = EVEN2.replace("\"1/2\",0", "0.5,0");
        assert!(matches!(parse_pdiv_json(&text), Err(Error::Parse(_))));
    }
}
