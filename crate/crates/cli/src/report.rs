//! Run reports: a JSON form with exact values only and a human table.

use fcl_core::exactgeom::rational::to_f64;
use fcl_core::exactgeom::{fmt_q, Q};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::commands::Output;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    /// Arguments after the program name.
    pub command: Vec<String>,
    /// SHA-256 of the canonical JSON of `input`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    /// The parsed input in its wire format.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Value>,
    pub results: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub certificates: Value,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
    #[serde(skip)]
    rows: Vec<(String, String)>,
}

/// Canonical text of a JSON value: object keys sorted, no whitespace.
pub fn canonical_json(v: &Value) -> String {
    // serde_json's default map is ordered by key.
    serde_json::to_string(v).expect("serializable")
}

pub fn digest(v: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(v).as_bytes()))
}

impl RunReport {
    pub fn new(command: Vec<String>, out: Output, timing_ms: Option<u128>) -> RunReport {
        RunReport {
            command,
            input_digest: out.input.as_ref().map(digest),
            input: out.input,
            results: out.results,
            certificates: out.certificates,
            warnings: out.warnings,
            timing_ms,
            rows: out.rows,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = format!("fcl {}\n", self.command.join(" "));
        if let Some(d) = &self.input_digest {
            out.push_str(&format!("  {:width$}  sha256:{}\n", "input", &d[..16], width = width));
        }
        for (k, v) in &self.rows {
            let pad = width - k.chars().count();
            let mut lines = v.lines();
            out.push_str(&format!("  {k}{}  {}\n", " ".repeat(pad), lines.next().unwrap_or("")));
            for l in lines {
                out.push_str(&format!("  {}  {l}\n", " ".repeat(width)));
            }
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("  ({t} ms)\n"));
        }
        out
    }
}

pub fn error_json(command: &[String], e: &CliError, code: i32) -> String {
    let v = serde_json::json!({ "command": command, "error": e.to_string(), "exit_code": code });
    format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
}

/// An exact value with a decimal approximation for non-integers.
pub fn show_q(x: &Q) -> String {
    if x.is_integer() {
        fmt_q(x)
    } else {
        format!("{} ≈ {}", fmt_q(x), approx(to_f64(x)))
    }
}

fn approx(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use fcl_core::exactgeom::{q, qr};

    #[test]
    fn approximations_are_marked() {
        assert_eq!(show_q(&q(5)), "5");
        assert_eq!(show_q(&qr(27, 2)), "27/2 ≈ 13.5");
        assert_eq!(show_q(&qr(-1, 3)), "-1/3 ≈ -0.333333");
    }

    #[test]
    fn digest_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"a": [1, 2], "b": 1}"#).unwrap();
        assert_eq!(digest(&a), digest(&b));
    }
}
