//! Versioned tabular output in CSV or JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            // shortest round-trip representation, so output is byte-stable
            Self::Float(v) if v.is_nan() => "NaN".into(),
            Self::Float(v) if *v == 0.0 => "0.0".into(),
            Self::Float(v) => format!("{v:?}"),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Self::Int(v) => (*v).into(),
            Self::Float(v) if v.is_finite() => (*v).into(),
            Self::Float(_) => self.render().into(),
            Self::Text(s) => s.clone().into(),
            Self::Bool(b) => (*b).into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Self::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Self::Int(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.into())
    }
}

/// A named table with a versioned schema tag, e.g. `rank_curve.v1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub schema: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    schema: &'a str,
    columns: &'a [&'static str],
    rows: Vec<Vec<serde_json::Value>>,
}

impl Table {
    pub fn new(name: &'static str, schema: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            schema,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Numeric column, `None` if absent; text cells become NaN.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        Some(
            self.column(name)?
                .into_iter()
                .map(|c| match c {
                    Cell::Int(v) => *v as f64,
                    Cell::Float(v) => *v,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }

    /// CSV with a leading `# schema=...` comment line.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = format!("# schema={}\n", self.schema).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let fail = |e: csv::Error| CliError::Output {
                path: PathBuf::from(self.name),
                message: e.to_string(),
            };
            w.write_record(&self.columns).map_err(fail)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
            }
            w.flush().map_err(|e| CliError::Io {
                path: PathBuf::from(self.name),
                source: e,
            })?;
        }
        Ok(buf)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let doc = JsonTable {
            schema: self.schema,
            columns: &self.columns,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::json).collect())
                .collect(),
        };
        let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Output {
            path: PathBuf::from(self.name),
            message: e.to_string(),
        })?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes `<dir>/<name>.<ext>` and returns the path.
    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        let bytes = self.render(format)?;
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut file = fs::File::create(&path).map_err(io)?;
        file.write_all(&bytes).map_err(io)?;
        Ok(path)
    }
}
