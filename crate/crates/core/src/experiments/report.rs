use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// One CSV/JSON cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    /// Integers verbatim, reals with 17 significant digits.
    pub fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub pass: bool,
    /// Positive when passing; distance to the threshold.
    pub margin: f64,
}

impl Verdict {
    pub fn new(claim: impl Into<String>, pass: bool, margin: f64) -> Self {
        Self {
            claim: claim.into(),
            pass,
            margin,
        }
    }

    /// Passes iff `lhs ≤ rhs`.
    pub fn at_most(claim: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::new(claim, lhs <= rhs, rhs - lhs)
    }
}

/// Which finite substitutions stand in for suprema over infinite families.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Provenance {
    /// A finite catalog replaces a sup over a function class.
    pub catalog_surrogate: bool,
    /// A dyadic grid replaces a sup over continuous scales.
    pub dyadic_scales: bool,
    /// Finite s-samples replace a statement for (almost) every s.
    pub sampled_shifts: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub inputs: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Value,
    pub verdicts: Vec<Verdict>,
    pub provenance: Provenance,
    pub log: Vec<String>,
    pub error: Option<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, inputs: Value, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            inputs,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Value::Null,
            verdicts: Vec::new(),
            provenance: Provenance::default(),
            log: Vec::new(),
            error: None,
        }
    }

    /// A report carrying only a runtime failure.
    pub fn failed(name: &str, inputs: Value, error: &Error) -> Self {
        let mut r = Self::new(name, inputs, &[]);
        r.error = Some(error.to_string());
        r
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    /// No error and every verdict passes.
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Header plus rows, comma separated, LF line endings.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    /// One line per verdict, then an overall line.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .verdicts
            .iter()
            .map(|v| {
                format!(
                    "{} {} (margin {:.6e})",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.claim,
                    v.margin
                )
            })
            .collect();
        if let Some(e) = &self.error {
            lines.push(format!("ERROR {e}"));
        }
        lines.push(format!(
            "{}: {}/{} verdicts pass",
            self.name,
            self.verdicts.iter().filter(|v| v.pass).count(),
            self.verdicts.len()
        ));
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new("t", Value::Null, &["a", "b", "c"]);
        r.push_row(vec![1.0.into(), 3usize.into(), "x,y".into()]);
        assert_eq!(r.to_csv().unwrap(), "a,b,c\n1.0000000000000000e0,3,\"x,y\"\n");
    }

    #[test]
    fn seventeen_significant_digits_round_trip() {
        let x = 0.1 + 0.2;
        let s = Cell::Num(x).to_csv_field();
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn pass_requires_all_verdicts_and_no_error() {
        let mut r = ExperimentReport::new("t", Value::Null, &[]);
        assert!(r.passed());
        r.verdict(Verdict::at_most("x", 1.0, 2.0));
        assert!(r.passed());
        r.verdict(Verdict::at_most("y", 3.0, 2.0));
        assert!(!r.passed());
        let f = ExperimentReport::failed("t", Value::Null, &Error::NonFinite);
        assert!(!f.passed());
    }
}
