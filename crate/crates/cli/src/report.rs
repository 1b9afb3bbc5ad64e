//! Report files: `summary.json` plus one `detail_<name>.csv` per table.
//! Floats are written as C `%.12e`; non-finite values as `inf`, `-inf`, `nan`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;

/// C-style `%.12e`: two-digit signed exponent.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// JSON number in `%.12e` form, or a string for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&sci(x)).expect("valid JSON number"))
    } else {
        Value::String(sci(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => sci(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A tidy table written to `detail_<name>.csv`.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// One hard tolerance.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let pass = measured.is_finite() && measured <= tolerance;
        Self { name: name.into(), measured, tolerance, bound: Bound::AtMost, pass }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let pass = measured.is_finite() && measured >= tolerance;
        Self { name: name.into(), measured, tolerance, bound: Bound::AtLeast, pass }
    }

    fn to_json(&self) -> Value {
        let bound = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        json!({
            "name": self.name,
            "measured": num(self.measured),
            "bound": bound,
            "tolerance": num(self.tolerance),
            "pass": self.pass,
        })
    }
}

/// Output of one suite run.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_json(&self) -> String {
        let mut top = Map::new();
        top.insert("schema_version".into(), json!(SCHEMA_VERSION));
        top.insert("suite".into(), json!(self.suite));
        top.insert("config".into(), self.config.clone());
        top.insert("checks".into(), Value::Array(self.checks.iter().map(Check::to_json).collect()));
        top.insert("tables".into(), json!(self.tables.iter().map(|t| format!("detail_{}.csv", t.name)).collect::<Vec<_>>()));
        top.insert("pass".into(), json!(self.passed()));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable summary");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.json"), self.summary_json())?;
        for t in &self.tables {
            fs::write(dir.join(format!("detail_{}.csv", t.name)), t.to_csv()?)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(sci(1.5), "1.500000000000e+00");
        assert_eq!(sci(-2.5e-9), "-2.500000000000e-09");
        assert_eq!(sci(6.02e123), "6.020000000000e+123");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(f64::INFINITY), "inf");
        assert_eq!(serde_json::to_string(&num(3.0)).unwrap(), "3.000000000000e+00");
        assert_eq!(serde_json::to_string(&num(f64::NAN)).unwrap(), "\"nan\"");
    }

    #[test]
    fn csv_quotes_lists_and_uses_lf() {
        let mut t = Table::new("x", &["weight", "ratio"]);
        t.push(vec!["jacobi:0,0,0".into(), 0.25.into()]);
        assert_eq!(t.to_csv().unwrap(), "weight,ratio\n\"jacobi:0,0,0\",2.500000000000e-01\n");
    }

    #[test]
    fn checks_reject_nan() {
        assert!(!Check::at_most("a", f64::NAN, 1.0).pass);
        assert!(Check::at_least("b", 2.0, 1.0).pass);
    }
}
