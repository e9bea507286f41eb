//! Output plumbing: the run manifest plus tabular CSV/JSON emission.
//!
//! Identical flags and seed must produce byte-identical files, so nothing
//! here depends on the wall clock or thread scheduling; the manifest
//! timestamp is the binary's build time.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to reproduce an output bit-for-bit.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub built_unix: u64,
    pub command: String,
    pub seed: u64,
    pub params: Value,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, params: Value) -> Self {
        Self {
            tool: "fascop",
            version: env!("CARGO_PKG_VERSION"),
            built_unix: env!("FASCOP_BUILD_UNIX")
                .parse()
                .expect("build script emits an integer"),
            command: command.to_string(),
            seed,
            params,
        }
    }
}

/// One table cell: a number (NaN marks a failed evaluation) or nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn render_csv(manifest: &Manifest, table: &Table) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "# manifest: {}\n",
        serde_json::to_string(manifest).expect("manifest serializes")
    ));
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => format!("{v}"),
                Cell::Empty => String::new(),
            })
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn render_json(manifest: &Manifest, table: &Table) -> String {
    let rows: Vec<Vec<Value>> = table
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| match c {
                    Cell::Num(v) => serde_json::Number::from_f64(*v)
                        .map(Value::Number)
                        .unwrap_or(Value::Null),
                    Cell::Empty => Value::Null,
                })
                .collect()
        })
        .collect();
    let doc = json!({
        "manifest": manifest,
        "columns": table.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

pub fn emit(
    manifest: &Manifest,
    table: &Table,
    format: Format,
    out: Option<&Path>,
) -> io::Result<()> {
    let rendered = match format {
        Format::Csv => render_csv(manifest, table),
        Format::Json => render_json(manifest, table),
    };
    match out {
        Some(path) => std::fs::write(path, rendered),
        None => io::stdout().write_all(rendered.as_bytes()),
    }
}

/// Writes an arbitrary pre-rendered report.
pub fn emit_text(text: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}
