//! Experiment configuration, verification suites and run reports.
//!
//! Every command returns a [`RunReport`]. Reports echo the resolved
//! configuration so that a run can be repeated from its report alone, and
//! serialise every float with 17 significant digits.

mod commands;
mod suites;

pub use commands::{
    cmd_bounds, cmd_caratheodory, cmd_simulate, cmd_verify, cmd_wilson, BoundsConfig, CaratheodoryConfig,
    ExitEventConfig, SimulateConfig, Space, VerifyConfig,
};
pub use suites::{
    CaratheodoryParams, Comparison1dParams, DiskSchwarzParams, DominanceParams, H2cParams, MartingaleParams,
    PsdParams, Suite,
};

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

/// Seed used when neither the config nor the command line provides one.
pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn engine_version() -> String {
    format!("coupleman {}", env!("CARGO_PKG_VERSION"))
}

/// Formats a float with 17 significant digits; non-finite values print as
/// `nan`, `inf` or `-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

/// One check of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Statement the check exercises.
    pub anchor: String,
    pub point: f64,
    pub se: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub bound: Option<f64>,
    pub verdict: Verdict,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: &str, point: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            point,
            se: None,
            interval: None,
            bound: None,
            verdict: Verdict::ReportOnly,
        }
    }

    pub fn se(mut self, se: f64) -> Self {
        self.se = Some(se);
        self
    }

    pub fn interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = Some((lo, hi));
        self
    }

    pub fn bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn pass_if(mut self, ok: bool) -> Self {
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self
    }
}

/// A table cell. Numbers print with 17 significant digits; `Missing` is an
/// empty CSV field and `null` in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Missing,
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Text(t) => s.serialize_str(t),
            Cell::Int(i) => s.serialize_u64(*i),
            Cell::Num(v) => s.serialize_f64(*v),
            Cell::Missing => s.serialize_none(),
        }
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => fmt_f64(*v),
            Cell::Missing => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub engine: String,
    pub command: String,
    /// Resolved configuration; feeding it back reproduces the report.
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    pub warnings: Vec<String>,
    pub table: Option<Table>,
}

impl RunReport {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            engine: engine_version(),
            command: command.into(),
            config,
            checks: Vec::new(),
            warnings: Vec::new(),
            table: None,
        }
    }

    /// True when no check failed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    /// Pretty JSON with floats at 17 significant digits.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("reports serialise to JSON");
        to_json_string(&value)
    }

    /// Check records as CSV: `name,anchor,point,se,lo,hi,bound,verdict`.
    pub fn checks_csv(&self) -> String {
        let mut t = Table::new(&["name", "anchor", "point", "se", "lo", "hi", "bound", "verdict"]);
        let opt = |v: Option<f64>| v.map_or(Cell::Missing, Cell::Num);
        for c in &self.checks {
            t.rows.push(vec![
                Cell::Text(c.name.clone()),
                Cell::Text(c.anchor.clone()),
                Cell::Num(c.point),
                opt(c.se),
                opt(c.interval.map(|i| i.0)),
                opt(c.interval.map(|i| i.1)),
                opt(c.bound),
                Cell::Text(serde_json::to_value(c.verdict).unwrap().as_str().unwrap_or_default().to_string()),
            ]);
        }
        t.to_csv()
    }
}

/// Renders a JSON value with two-space indentation, formatting floats with
/// 17 significant digits and keeping integers as integers.
pub fn to_json_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                out.push_str(&if f.is_finite() { fmt_f64(f) } else { "null".into() });
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialise")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(|i| !i.is_array() && !i.is_object()) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(item, depth, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("keys serialise"));
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}
