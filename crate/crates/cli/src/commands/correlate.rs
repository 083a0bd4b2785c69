use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;
use topcov::analysis::{bootstrap_ci, BootstrapCI, BootstrapConfig};

use crate::config::RunConfig;
use crate::error::{with_path, CliError, CliResult};
use crate::output::{ensure_dir, write_json, Meta, NA};
use crate::CorrelateArgs;

/// `key -> value` for one column; `None` where the cell is `NA`.
fn read_column(path: &Path, key: &[String], col: &str) -> CliResult<Vec<(Vec<String>, Option<f64>)>> {
    let mut r = with_path(path, csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path))?;
    let headers = with_path(path, r.headers())?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::incompatible(format!("no column {name:?}")).at(path))
    };
    let key_idx = key.iter().map(|k| find(k)).collect::<CliResult<Vec<_>>>()?;
    let col_idx = find(col)?;
    let mut out = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = with_path(path, rec)?;
        let k: Vec<String> = key_idx.iter().map(|&i| rec[i].to_owned()).collect();
        let cell = &rec[col_idx];
        let v = if cell == NA {
            None
        } else {
            let x: f64 = cell
                .parse()
                .map_err(|_| CliError::new("parse", format!("line {}: {cell:?} is not a number", n + 2)).at(path))?;
            Some(x)
        };
        out.push((k, v));
    }
    Ok(out)
}

#[derive(Serialize)]
struct Report {
    x: String,
    y: String,
    key: Vec<String>,
    joined: usize,
    dropped_na: usize,
    results: Vec<BootstrapCI>,
}

pub fn run(cfg: &RunConfig, args: &CorrelateArgs) -> CliResult<()> {
    let mut c = cfg.correlate.clone();
    if let Some(k) = &args.key {
        c.key = k.clone();
    }
    if let Some(m) = &args.methods {
        c.methods = m.clone();
    }
    c.n_resamples = args.resamples.unwrap_or(c.n_resamples);
    c.level = args.level.unwrap_or(c.level);
    if c.key.is_empty() || c.methods.is_empty() {
        return Err(CliError::usage("correlate needs a join key and at least one method"));
    }

    let xs = read_column(&args.x, &c.key, &args.x_col)?;
    let ys = read_column(&args.y, &c.key, &args.y_col)?;
    let mut y_by_key = HashMap::with_capacity(ys.len());
    for (k, v) in ys {
        if y_by_key.insert(k.clone(), v).is_some() {
            return Err(CliError::incompatible(format!("duplicate key {k:?}")).at(&args.y));
        }
    }

    // Rows joined in the order of the first file.
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let (mut joined, mut dropped) = (0, 0);
    for (k, xv) in xs {
        let Some(&yv) = y_by_key.get(&k) else { continue };
        joined += 1;
        match (xv, yv) {
            (Some(a), Some(b)) => {
                x.push(a);
                y.push(b);
            }
            _ => dropped += 1,
        }
    }
    if x.is_empty() {
        return Err(CliError::incompatible("no joined rows with values in both columns"));
    }

    let results = c
        .methods
        .iter()
        .map(|&statistic| {
            let bc = BootstrapConfig { statistic, n_resamples: c.n_resamples, level: c.level, seed: cfg.seed };
            bootstrap_ci(&x, statistic.is_paired().then_some(&y[..]), &bc)
        })
        .collect::<topcov::Result<Vec<_>>>()?;
    let report = Report {
        x: format!("{}:{}", args.x.display(), args.x_col),
        y: format!("{}:{}", args.y.display(), args.y_col),
        key: c.key.clone(),
        joined,
        dropped_na: dropped,
        results,
    };

    ensure_dir(&args.out)?;
    let mut meta = Meta::new("correlate", vec![cfg.seed], &c)?;
    meta.input("x", &report.x)?;
    meta.input("y", &report.y)?;
    let path = args.out.join("analysis.json");
    write_json(&path, &report)?;
    meta.output(&path);
    meta.write(&args.out)
}
