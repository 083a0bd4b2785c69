//! Output helpers: fixed-format CSV tables, atomic writes and the per-stage
//! `meta.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use topcov::corpus::write_atomic;

use crate::error::{with_path, CliError, CliResult};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const NA: &str = "NA";

/// Six-decimal fixed point; negative zero prints as zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub fn fmt6_opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.into(), fmt6)
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_owned()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::new("io", e.to_string()))
    }

    /// Writes the table and reads it back to confirm the header and row widths.
    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_file(path, &self.to_bytes()?)?;
        validate_csv(path, &self.header, self.rows.len())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    with_path(path, write_atomic(path, bytes))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    with_path(dir, fs::create_dir_all(dir))
}

fn validate_csv(path: &Path, header: &[String], rows: usize) -> CliResult<()> {
    let mut r = with_path(path, csv::ReaderBuilder::new().from_path(path))?;
    let got = with_path(path, r.headers())?.clone();
    if got.iter().ne(header.iter().map(String::as_str)) {
        return Err(CliError::new("validation", "header mismatch after write").at(path));
    }
    let mut n = 0;
    for rec in r.records() {
        with_path(path, rec)?;
        n += 1;
    }
    if n != rows {
        return Err(CliError::new("validation", format!("expected {rows} rows, read {n}")).at(path));
    }
    Ok(())
}

/// Record of one command invocation, written next to its outputs.
pub struct Meta {
    command: &'static str,
    seeds: Vec<u64>,
    inputs: Value,
    config: Value,
    outputs: Vec<PathBuf>,
}

impl Meta {
    pub fn new<C: Serialize>(command: &'static str, seeds: Vec<u64>, config: &C) -> CliResult<Self> {
        Ok(Self { command, seeds, inputs: json!({}), config: serde_json::to_value(config)?, outputs: Vec::new() })
    }

    pub fn input(&mut self, name: &str, value: impl Serialize) -> CliResult<()> {
        self.inputs[name] = serde_json::to_value(value)?;
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_owned());
    }

    pub fn to_value(&self) -> Value {
        let outputs: Vec<String> =
            self.outputs.iter().map(|p| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())).collect();
        json!({
            "command": self.command,
            "toolkit_version": TOOLKIT_VERSION,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "config": self.config,
            "outputs": outputs,
        })
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        write_json(&dir.join("meta.json"), &self.to_value())
    }
}
