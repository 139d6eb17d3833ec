//! Rendering of command results as JSON, CSV or a plain-text table.

use std::fmt::Write as _;

use clap::ValueEnum;
use nclass_core::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// One self-test comparison: passes when `value <= bound`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl Cell {
    /// Shortest round-trip form for numbers, as in the JSON output.
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => serde_json::to_string(x).expect("finite"),
            Cell::Int(n) => n.to_string(),
            Cell::Num(_) | Cell::Empty => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Rows as a list of objects keyed by the header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    Value::Object(
                        self.header
                            .iter()
                            .zip(row)
                            .map(|(h, c)| (h.clone(), c.json()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub doc: Value,
    pub table: Option<Table>,
    pub checks: Vec<Check>,
    pub default_format: Format,
}

impl Output {
    pub fn json(doc: Value) -> Self {
        Self {
            doc,
            table: None,
            checks: Vec::new(),
            default_format: Format::Json,
        }
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn render(&self, format: Format, verify: bool) -> CliResult<String> {
        let mut doc = self.doc.clone();
        if verify {
            if let Value::Object(map) = &mut doc {
                map.insert("verify".into(), json!(self.checks));
            }
        }
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&doc).expect("documents are plain JSON");
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("this command has no CSV form; use --json".into()))?;
                render_csv(&doc, table)
            }
            Format::Table => Ok(render_text(&doc, self.table.as_ref())),
        }
    }
}

/// `[re, im]`.
pub fn cx(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Metadata lines (`# key: value`) followed by the CSV body.
fn render_csv(doc: &Value, table: &Table) -> CliResult<String> {
    let mut out = String::new();
    if let Some(Value::Object(meta)) = doc.get("meta") {
        for (k, v) in meta {
            let _ = writeln!(out, "# {k}: {}", scalar(v));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    out.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
    Ok(out)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_text(doc: &Value, table: Option<&Table>) -> String {
    let mut lines = Vec::new();
    flatten("", doc, &mut lines);
    let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in &lines {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    if let Some(t) = table {
        out.push('\n');
        let _ = writeln!(
            out,
            "{}",
            t.header.iter().map(|h| format!("{h:>22}")).collect::<String>()
        );
        for row in &t.rows {
            let cells: String = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format!("{x:>22.12}"),
                    Cell::Int(n) => format!("{n:>22}"),
                    Cell::Text(s) => format!("{s:>22}"),
                    Cell::Empty => format!("{:>22}", "-"),
                })
                .collect();
            let _ = writeln!(out, "{cells}");
        }
    }
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) && items.len() <= 64 => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_carries_metadata_and_blank_cells() {
        let mut t = Table::new(&["tau_or_phi", "F_exact", "F_predicted"]);
        t.push(vec![0.5.into(), 3.25.into(), 3.25.into()]);
        t.push(vec![0.55.into(), 1e-16.into(), Cell::Empty]);
        let out = Output {
            doc: json!({"meta": {"tool": "nclass"}}),
            table: Some(t),
            checks: vec![],
            default_format: Format::Csv,
        };
        let s = out.render(Format::Csv, false).unwrap();
        assert_eq!(
            s,
            "# tool: nclass\ntau_or_phi,F_exact,F_predicted\n0.5,3.25,3.25\n0.55,1e-16,\n"
        );
    }

    #[test]
    fn csv_requires_a_table() {
        let out = Output::json(json!({"a": 1}));
        assert!(matches!(out.render(Format::Csv, false), Err(CliError::Usage(_))));
    }

    #[test]
    fn verify_block_is_appended() {
        let mut out = Output::json(json!({"a": 1}));
        out.checks.push(Check::new("x", 2.0, 1.0));
        let s = out.render(Format::Json, true).unwrap();
        assert!(s.contains("\"passed\": false"));
        assert_eq!(out.failed_checks().len(), 1);
    }

    #[test]
    fn text_flattens_nested_keys() {
        let out = Output::json(json!({"meta": {"dim": 4}, "W": 0.25}));
        let s = out.render(Format::Table, false).unwrap();
        assert!(s.contains("meta.dim  4"));
    }
}
