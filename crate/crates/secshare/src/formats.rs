//! File formats: state and behavior JSON, tables as CSV or JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use secshare_core::protocol::{Behavior, Scores, Task};
use secshare_core::{CMat, DensityMatrix};

use crate::error::{CliError, CliResult};

/// A matrix as `{dim, re, im}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_mat(m: &CMat) -> Self {
        let d = m.dim();
        MatrixFile {
            dim: d,
            re: (0..d).map(|r| (0..d).map(|c| m[(r, c)].re).collect()).collect(),
            im: (0..d).map(|r| (0..d).map(|c| m[(r, c)].im).collect()).collect(),
        }
    }

    /// The matrix; a missing `im` means a real matrix.
    pub fn to_mat(&self) -> CliResult<CMat> {
        let d = self.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !rows_ok(&self.re) || !(self.im.is_empty() || rows_ok(&self.im)) {
            return Err(CliError::validation(format!("matrix rows do not match dim = {d}")));
        }
        let re: Vec<f64> = self.re.iter().flatten().copied().collect();
        let im: Vec<f64> = if self.im.is_empty() { vec![0.0; d * d] } else { self.im.iter().flatten().copied().collect() };
        Ok(CMat::from_parts(d, &re, &im)?)
    }

    pub fn to_state(&self) -> CliResult<DensityMatrix> {
        if self.dim != 4 {
            return Err(CliError::validation(format!("a two-qubit state has dim 4, found {}", self.dim)));
        }
        Ok(DensityMatrix::new(self.to_mat()?)?)
    }
}

/// Reads a state file; any failure is a validation error.
pub fn read_state(path: &Path) -> CliResult<DensityMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read state file {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("malformed state file {}: {e}", path.display())))?;
    file.to_state()
}

pub fn state_json(rho: &DensityMatrix) -> Value {
    serde_json::to_value(MatrixFile::from_mat(rho.mat())).expect("plain data")
}

pub fn task_name(task: Task) -> &'static str {
    match task {
        Task::Deterministic => "deterministic",
        Task::Stochastic => "stochastic",
    }
}

/// `{task, p}` with `p[z][x][y][a]`; deterministic behaviors omit the `⊥` slot.
pub fn behavior_json(b: &Behavior) -> Value {
    let k = b.task().alphabet();
    let p: Vec<Vec<Vec<Vec<f64>>>> = b
        .table()
        .iter()
        .map(|zs| zs.iter().map(|xs| xs.iter().map(|ys| ys[..k].to_vec()).collect()).collect())
        .collect();
    json!({ "task": task_name(b.task()), "p": p })
}

pub fn scores_json(s: &Scores) -> Value {
    match *s {
        Scores::Deterministic { s } => json!({ "S": s }),
        Scores::Stochastic { scrt, ctrl, r } => json!({ "Rscrt": scrt, "Rctrl": ctrl, "R": r }),
    }
}

/// `(name, value)` pairs of a score set, in output order.
pub fn score_fields(s: &Scores) -> Vec<(&'static str, f64)> {
    match *s {
        Scores::Deterministic { s } => vec![("S", s)],
        Scores::Stochastic { scrt, ctrl, r } => vec![("Rscrt", scrt), ("Rctrl", ctrl), ("R", r)],
    }
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(k) => json!(k),
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(k: i64) -> Self {
        Cell::Int(k)
    }
}

impl From<u64> for Cell {
    fn from(k: u64) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<u32> for Cell {
    fn from(k: u32) -> Self {
        Cell::Int(i64::from(k))
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
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

/// Output format of tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A named table with fixed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row.
    ///
    /// # Panics
    /// If the row length differs from the column count.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => to_json_string(&self.to_json()),
        }
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use secshare_core::states::isotropic;

    #[test]
    fn state_round_trip() {
        let rho = isotropic(0.47).unwrap();
        let file: MatrixFile = serde_json::from_value(state_json(&rho)).unwrap();
        assert_eq!(file.to_state().unwrap().mat().max_abs_diff(rho.mat()), 0.0);
    }

    #[test]
    fn rejects_bad_states() {
        let bad = MatrixFile { dim: 4, re: vec![vec![1.0, 0.0, 0.0, 0.0]; 4], im: vec![] };
        assert!(bad.to_state().is_err());
        let short = MatrixFile { dim: 4, re: vec![vec![0.25; 4]; 3], im: vec![] };
        assert!(matches!(short.to_state(), Err(CliError::Validation(_))));
    }

    #[test]
    fn csv_quotes_and_floats() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![Cell::from("x,y"), Cell::from(0.1)]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",0.1\n");
    }
}
