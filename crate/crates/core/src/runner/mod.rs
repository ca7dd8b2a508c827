//! Config-driven experiment runner: one JSON config in, one CSV table and
//! one JSON summary out.

pub mod config;
mod experiments;

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

pub use config::{parse_config, Experiment, ExperimentConfig, KINDS};

/// A malformed or unsatisfiable config, or an output failure.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<crate::Error> for ConfigError {
    fn from(e: crate::Error) -> Self {
        Self(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, ConfigError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| ConfigError::new(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| ConfigError::new(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| ConfigError::new(e.to_string()))
    }
}

/// The result of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub table: Table,
    /// Key values, merged into the summary under `results`.
    pub results: Map<String, Value>,
}

impl Outcome {
    pub fn summary(&self, cfg: &ExperimentConfig) -> Value {
        json!({
            "experiment": cfg.kind,
            "name": cfg.name,
            "seed": cfg.seed,
            "parameters": cfg.raw,
            "pass": self.pass,
            "results": self.results,
        })
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, ConfigError> {
    experiments::run(cfg)
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug, PartialEq)]
pub struct Written {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome, dir: &Path) -> Result<Written, ConfigError> {
    let io = |p: &Path, e: std::io::Error| ConfigError::new(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let csv = dir.join(format!("{}.csv", cfg.name));
    let summary = dir.join(format!("{}.summary.json", cfg.name));
    std::fs::write(&csv, outcome.table.to_csv()?).map_err(|e| io(&csv, e))?;
    let mut text = serde_json::to_string_pretty(&outcome.summary(cfg)).map_err(|e| ConfigError::new(e.to_string()))?;
    text.push('\n');
    std::fs::write(&summary, text).map_err(|e| io(&summary, e))?;
    Ok(Written { csv, summary })
}

pub fn list_text() -> String {
    let mut out = String::new();
    let width = KINDS.iter().map(|k| k.0.len()).max().unwrap_or(0);
    for (kind, required, optional, about) in KINDS {
        out.push_str(&format!("{kind:width$}  {about}\n"));
        out.push_str(&format!("{:width$}  required: kind, seed, {}\n", "", required.join(", ")));
        if !optional.is_empty() {
            out.push_str(&format!("{:width$}  optional: name, {}\n", "", optional.join(", ")));
        } else {
            out.push_str(&format!("{:width$}  optional: name\n", ""));
        }
    }
    out
}

pub fn list_json() -> Value {
    Value::Array(
        KINDS
            .iter()
            .map(|(kind, required, optional, about)| {
                let mut req = vec!["kind", "seed"];
                req.extend_from_slice(required);
                let mut opt = vec!["name"];
                opt.extend_from_slice(optional);
                json!({"kind": kind, "description": about, "required": req, "optional": opt})
            })
            .collect(),
    )
}
