//! Tabular reports as JSON or CSV.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => Value::from(*v),
            Cell::Num(v) if v.is_nan() => Value::from("nan"),
            Cell::Num(v) => Value::from(if *v > 0.0 { "inf" } else { "-inf" }),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v}"),
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => (if *v > 0.0 { "inf" } else { "-inf" }).into(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Ordered key/value record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(String, Cell)>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, v: impl Into<Cell>) -> Self {
        self.push(key, v);
        self
    }

    pub fn push(&mut self, key: &str, v: impl Into<Cell>) {
        self.0.push((key.into(), v.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.0 {
            m.insert(k.clone(), v.to_json());
        }
        Value::Object(m)
    }
}

/// A command's output: configuration, per-item rows and aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: Row,
    pub rows: Vec<Row>,
    pub summary: Row,
}

impl Report {
    pub fn new(command: &str, config: Row) -> Self {
        Self {
            command: command.into(),
            config,
            rows: Vec::new(),
            summary: Row::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut m = Map::new();
        m.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        m.insert("command".into(), Value::from(self.command.as_str()));
        m.insert("config".into(), self.config.to_json());
        m.insert(
            "rows".into(),
            Value::Array(self.rows.iter().map(Row::to_json).collect()),
        );
        m.insert("summary".into(), self.summary.to_json());
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("plain JSON values");
        s.push('\n');
        s
    }

    /// Rows only, with the union of their keys as header in first-seen order.
    pub fn to_csv(&self) -> Result<String> {
        let mut header: Vec<&str> = Vec::new();
        for r in &self.rows {
            for (k, _) in &r.0 {
                if !header.contains(&k.as_str()) {
                    header.push(k);
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for r in &self.rows {
            w.write_record(
                header
                    .iter()
                    .map(|k| r.get(k).map(Cell::to_csv).unwrap_or_default()),
            )?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 cells"))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => Ok(self.to_json()),
            ReportFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        let text = self.render(format)?;
        write_atomic(path, |f| f.write_all(text.as_bytes()))
    }
}
