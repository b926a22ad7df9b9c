//! Rectangular result tables and their three output formats.
//!
//! CSV and JSON carry full precision (floats are written so they parse back
//! to the same bits); the text format rounds to six significant digits.

use std::io::{Read, Write};

use serde_json::{Map, Number, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Text,
}

impl Format {
    /// Guesses a format from an output file name.
    pub fn from_extension(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("txt") => Format::Text,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

impl Cell {
    fn full_precision(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            // Debug keeps a decimal point or exponent, so the reader can tell
            // floats from integers, and round-trips exactly.
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn rounded(&self) -> String {
        match self {
            Cell::Float(v) => sig6(*v),
            other => other.full_precision(),
        }
    }

    fn parse(field: &str) -> Cell {
        if field.is_empty() {
            return Cell::Empty;
        }
        if let Ok(i) = field.parse::<i64>() {
            return Cell::Int(i);
        }
        let numeric = field.contains(['.', 'e', 'E']) || matches!(field, "NaN" | "inf" | "-inf");
        match field.parse::<f64>() {
            Ok(v) if numeric => Cell::Float(v),
            _ => Cell::Text(field.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }

    fn from_json(v: &Value) -> Option<Cell> {
        Some(match v {
            Value::Null => Cell::Empty,
            Value::Number(n) if n.is_i64() => Cell::Int(n.as_i64()?),
            Value::Number(n) => Cell::Float(n.as_f64()?),
            Value::String(s) => Cell::Text(s.clone()),
            _ => return None,
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// Six significant digits.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
            Format::Text => self.write_text(out),
        }
    }

    pub fn to_bytes(&self, format: Format) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("writing to memory cannot fail");
        buf
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::full_precision))?;
        }
        w.flush()
    }

    fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::to_json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut *out, &rows)?;
        writeln!(out)
    }

    fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::rounded).collect())
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([self.columns[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |out: &mut dyn Write, fields: &[String]| -> std::io::Result<()> {
            let padded: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect();
            writeln!(out, "{}", padded.join("  ").trim_end())
        };
        line(out, &self.columns)?;
        for row in &cells {
            line(out, row)?;
        }
        Ok(())
    }

    pub fn read_csv(input: impl Read, path: &std::path::Path) -> CliResult<Table> {
        let mut r = csv::Reader::from_reader(input);
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| CliError::parse(path, 1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut table = Table::new(columns);
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| CliError::parse(path, i as u64 + 2, e.to_string()))?;
            table.rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(table)
    }

    pub fn read_json(input: impl Read, path: &std::path::Path) -> CliResult<Table> {
        let value: Value =
            serde_json::from_reader(input).map_err(|e| CliError::parse(path, e.line() as u64, e.to_string()))?;
        let Value::Array(items) = value else {
            return Err(CliError::parse(path, 1, "expected an array of rows"));
        };
        let mut table = Table::default();
        for (i, item) in items.iter().enumerate() {
            let Value::Object(obj) = item else {
                return Err(CliError::parse(path, 1, format!("row {i} is not an object")));
            };
            if i == 0 {
                table.columns = obj.keys().cloned().collect();
            }
            let row = table
                .columns
                .iter()
                .map(|c| obj.get(c).and_then(Cell::from_json))
                .collect::<Option<Vec<Cell>>>()
                .ok_or_else(|| CliError::parse(path, 1, format!("row {i} has missing or nested fields")))?;
            table.rows.push(row);
        }
        Ok(table)
    }
}
