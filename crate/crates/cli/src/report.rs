use std::fmt::Write as _;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub anchor: &'static str,
    pub quantity: String,
    pub value: f64,
    pub bracket: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Row {
    pub fn new(name: &str, anchor: &'static str, quantity: impl Into<String>) -> Self {
        Row {
            name: name.into(),
            anchor,
            quantity: quantity.into(),
            value: f64::NAN,
            bracket: None,
            tolerance: 0.0,
            pass: false,
            detail: String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub rows: Vec<Row>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn fixed(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "-".into()
    }
}

impl RunReport {
    pub fn first_failure(&self) -> Option<&Row> {
        self.rows.iter().find(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "anchor": r.anchor,
                    "quantity": r.quantity,
                    "value": num(r.value),
                    "bracket": r.bracket.map(num),
                    "tolerance": r.tolerance,
                    "pass": r.pass,
                    "detail": r.detail,
                })
            })
            .collect();
        let v = json!({
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "rows": rows,
        });
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,quantity,value,bracket,tolerance,pass,anchor,detail\n");
        for r in &self.rows {
            let bracket = r.bracket.map(|b| format!("{b:e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:e},{},{:e},{},{},{}",
                csv_field(&r.name),
                csv_field(&r.quantity),
                r.value,
                bracket,
                r.tolerance,
                r.pass,
                csv_field(r.anchor),
                csv_field(&r.detail),
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command  {}", self.command);
        let _ = writeln!(out, "inputs   sha256:{}", self.inputs_digest);
        let _ = writeln!(out, "seed     {}", self.seed);
        let name_w = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let qty_w = self
            .rows
            .iter()
            .map(|r| r.quantity.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let _ = writeln!(
            out,
            "{:<6} {:<name_w$} {:<qty_w$} {:>12} {:>12} {:>8}  anchor",
            "status", "name", "quantity", "value", "bracket", "tol"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<6} {:<name_w$} {:<qty_w$} {:>12} {:>12} {:>8.0e}  \"{}\"",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.quantity,
                fixed(r.value),
                r.bracket.map(fixed).unwrap_or_else(|| "-".into()),
                r.tolerance,
                r.anchor,
            );
            if !r.detail.is_empty() {
                let _ = writeln!(out, "{:<6} {}", "", r.detail);
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
