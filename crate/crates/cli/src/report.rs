//! Experiment reports: a table of rows, slope fits and named checks.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{ExperimentConfig, ExperimentId};

/// One table cell. Non-finite numbers serialise to JSON as the strings
/// "inf", "-inf" and "NaN".
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    /// CSV form: integers plainly, floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    /// Inverse of [`Cell::to_csv`].
    pub fn from_csv(s: &str) -> Cell {
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        match s.parse::<f64>() {
            Ok(x) => Cell::Num(x),
            Err(_) => Cell::Text(s.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(if x { "true" } else { "false" }.into())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::Num(x) => s.serialize_str(&x.to_string()),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Text(String),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Int(i) => Cell::Int(i),
            Raw::Num(x) => Cell::Num(x),
            Raw::Text(t) => match t.as_str() {
                "inf" | "-inf" | "NaN" => Cell::Num(t.parse().unwrap_or(f64::NAN)),
                _ => Cell::Text(t),
            },
        })
    }
}

/// How a fitted slope is judged against its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// |slope − target| ≤ tolerance.
    Within,
    /// slope ≤ target + tolerance.
    AtMost,
    /// slope ≥ target.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    /// Series label, matching [`ExperimentReport::series_label`] of the fitted rows.
    pub series: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Fit {
    pub fn judge(name: impl Into<String>, series: impl Into<String>, fit: &berezin_core::spectral::SlopeFit, target: f64, tolerance: f64, relation: Relation) -> Fit {
        let pass = match relation {
            Relation::Within => (fit.slope - target).abs() <= tolerance,
            Relation::AtMost => fit.slope <= target + tolerance,
            Relation::AtLeast => fit.slope >= target,
        };
        Fit { name: name.into(), series: series.into(), slope: fit.slope, intercept: fit.intercept, r2: fit.r2, target, tolerance, relation, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Cell,
    pub threshold: Cell,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, value: impl Into<Cell>, threshold: impl Into<Cell>, pass: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), value: value.into(), threshold: threshold.into(), pass, detail: detail.into() }
    }

    /// value ≤ threshold.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Check {
        Check::new(name, value, threshold, value <= threshold, detail)
    }

    /// value ≥ threshold.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Check {
        Check::new(name, value, threshold, value >= threshold, detail)
    }
}

/// Which columns the log-log plot uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    /// Columns whose values together label a series.
    pub series: Vec<String>,
}

/// Fields excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub runtime_seconds: f64,
    pub timestamp: u64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentId,
    pub claim: String,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub plot: Option<PlotSpec>,
    pub pass: bool,
    pub meta: Meta,
}

impl ExperimentReport {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Series label of a row, e.g. "n=2, p=inf".
    pub fn series_label(&self, row: &[Cell], series: &[String]) -> String {
        series
            .iter()
            .filter_map(|s| self.column(s).map(|i| format!("{s}={}", label_cell(&row[i]))))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// The report as JSON without the run-dependent [`Meta`] block.
    pub fn payload_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialises");
        if let Some(o) = v.as_object_mut() {
            o.remove("meta");
        }
        serde_json::to_string_pretty(&v).expect("report serialises")
    }

    /// One line per fit and check.
    pub fn summary(&self) -> String {
        let mut s = format!("{} — {}\n", self.experiment, self.claim);
        for f in &self.fits {
            s += &format!(
                "  [{}] fit {} ({}): slope {:.4} target {:.4} ({:?}, tol {}) r2 {:.5}\n",
                if f.pass { "PASS" } else { "FAIL" },
                f.name,
                f.series,
                f.slope,
                f.target,
                f.relation,
                f.tolerance,
                f.r2
            );
        }
        for c in &self.checks {
            s += &format!(
                "  [{}] {}: {} vs {} {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                display_cell(&c.value),
                display_cell(&c.threshold),
                c.detail
            );
        }
        s += &format!("  overall: {}\n", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

/// Shortest exact form, used in series labels.
pub fn label_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
        Cell::Num(x) => format!("{x}"),
        other => display_cell(other),
    }
}

/// Six significant digits, used in summaries.
pub fn display_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
        Cell::Num(x) => format!("{x:.6e}"),
        Cell::Text(t) => t.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells_round_trip_bit_exactly() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, f64::INFINITY, 5e-324] {
            match Cell::from_csv(&Cell::Num(x).to_csv()) {
                Cell::Num(y) => assert_eq!(x.to_bits(), y.to_bits()),
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(Cell::from_csv("42"), Cell::Int(42));
        assert_eq!(Cell::from_csv("(1,2)"), Cell::Text("(1,2)".into()));
    }

    #[test]
    fn json_cells() {
        let v = vec![Cell::Int(3), Cell::Num(3.0), Cell::Num(f64::INFINITY), Cell::Text("ok".into())];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[3,3.0,"inf","ok"]"#);
        let back: Vec<Cell> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
