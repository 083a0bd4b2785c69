//! Drives the `topcov` binary through the full pipeline on the bundled
//! mini-corpus.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use topcov::matcher::LogisticModel;
use topcov::{ReferenceTopicSet, TopicModel};

pub const BIN: &str = env!("CARGO_BIN_EXE_topcov");

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn topcov(cwd: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(cwd).args(args).output().expect("failed to launch topcov")
}

fn step(cwd: &Path, args: &[&str]) -> Result<(), String> {
    let out = topcov(cwd, args);
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`topcov {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

/// Labels each exported pair the way a careful annotator would: by how many
/// of the top words the two topics share.
pub fn annotate(pairs_csv: &Path, out: &Path) -> Result<(), String> {
    let mut r = csv::Reader::from_path(pairs_csv).map_err(|e| e.to_string())?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(out).map_err(|e| e.to_string())?;
    w.write_record(["pair_id", "topic_a_ref", "topic_b_ref", "label_1", "label_2", "label_3"]).map_err(|e| e.to_string())?;
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let a: HashSet<&str> = rec[3].split(' ').collect();
        let shared = rec[5].split(' ').filter(|w| a.contains(w)).count();
        let strict = if shared >= 10 { "1" } else { "0" };
        let lenient = match shared {
            8.. => "1",
            5..=7 => "0.5",
            _ => "0",
        };
        w.write_record([&rec[0], &rec[1], &rec[2], lenient, lenient, strict]).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

const LDA: [&str; 2] = ["lda/lda-t8-s1.json", "lda/lda-t8-s2.json"];
const NMF: [&str; 2] = ["nmf/nmf-t8-s1.json", "nmf/nmf-t8-s2.json"];

/// Runs every stage inside `dir` with relative paths, so two runs in
/// different directories should produce identical files.
pub fn run_pipeline(dir: &Path) -> Result<(), String> {
    let input = dir.join("input");
    fs::create_dir_all(&input).map_err(|e| e.to_string())?;
    for f in ["mini_corpus.jsonl", "stopwords.txt", "refset_annotations.jsonl", "run.toml"] {
        fs::copy(fixtures().join(f), input.join(f)).map_err(|e| e.to_string())?;
    }
    let cfg = ["--config", "input/run.toml"];
    let models: Vec<&str> = LDA.iter().chain(&NMF).copied().collect();
    let with = |base: &[&str], extra: &[&str]| -> Vec<String> {
        cfg.iter().chain(base).chain(extra).map(|s| s.to_string()).collect()
    };
    let run = |args: Vec<String>| step(dir, &args.iter().map(String::as_str).collect::<Vec<_>>());

    run(with(&["ingest", "--input", "input/mini_corpus.jsonl", "--stopwords", "input/stopwords.txt", "--out", "corpus"], &[]))?;
    run(with(&["train", "--corpus", "corpus", "--model", "lda", "-t", "8", "--seeds", "1,2", "--out", "lda"], &[]))?;
    run(with(&["train", "--corpus", "corpus", "--model", "nmf", "-t", "8", "--seeds", "1,2", "--out", "nmf"], &[]))?;
    run(with(&["refset", "--corpus", "corpus", "--annotations", "input/refset_annotations.jsonl", "--out", "refset"], &[]))?;
    let mut pairs = vec!["pairs", "--corpus", "corpus", "--refset", "refset/refset.json", "--out", "pairs", "--models"];
    pairs.extend(&models);
    run(with(&pairs, &[]))?;
    annotate(&dir.join("pairs/pairs.csv"), &dir.join("pairs/labels.csv"))?;
    let mut mt = vec!["matcher-train", "--annotations", "pairs/labels.csv", "--refset", "refset/refset.json", "--out", "matcher", "--models"];
    mt.extend(&models);
    run(with(&mt, &[]))?;
    let mut cov = vec!["coverage", "--refset", "refset/refset.json", "--matcher", "matcher/matcher.json", "--measures", "aucdc,sup", "--out", "coverage", "--models"];
    cov.extend(&models);
    run(with(&cov, &[]))?;
    let mut sizes = vec!["sizes", "--corpus", "corpus", "--refset", "refset/refset.json", "--matcher", "matcher/matcher.json", "--out", "sizes", "--models"];
    sizes.extend(&models);
    run(with(&sizes, &[]))?;
    let lda_set = format!("lda={}", LDA.join(","));
    let nmf_set = format!("nmf={}", NMF.join(","));
    run(with(
        &["stability", "--set", &lda_set, "--set", &nmf_set, "--refset", "refset/refset.json", "--matcher", "matcher/matcher.json", "--out", "stability"],
        &[],
    ))?;
    let mut coh = vec!["coherence", "--corpus", "corpus", "--out", "coherence", "--models"];
    coh.extend(&models);
    run(with(&coh, &[]))?;
    run(with(
        &["correlate", "--x", "coherence/coherence.csv", "--x-col", "npmi", "--y", "coverage/topic_scores.csv", "--y-col", "cos", "--out", "correlate"],
        &[],
    ))?;
    Ok(())
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if bytes.contains(&b'\r') {
        return Err(format!("{}: carriage return in output", path.display()));
    }
    let mut r = csv::Reader::from_reader(&bytes[..]);
    let header = r.headers().map_err(|e| e.to_string())?.iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

/// A six-decimal real within `[lo, hi]`, or `NA` when allowed.
fn check_real(cell: &str, lo: f64, hi: f64, na_ok: bool, what: &str) -> Result<(), String> {
    if cell == "NA" {
        return if na_ok { Ok(()) } else { Err(format!("{what}: unexpected NA")) };
    }
    let frac = cell.rsplit_once('.').map(|(_, f)| f.len());
    let v: f64 = cell.parse().map_err(|_| format!("{what}: {cell:?} is not a number"))?;
    if frac != Some(6) || !(lo..=hi).contains(&v) {
        return Err(format!("{what}: {cell:?} is not a 6-decimal value in [{lo}, {hi}]"));
    }
    Ok(())
}

fn check_table(dir: &Path, name: &str, header: &[&str], rows: usize, cols: &[(usize, f64, f64, bool)]) -> Result<(), String> {
    let (h, data) = read_csv(&dir.join(name))?;
    if h != header {
        return Err(format!("{name}: header {h:?}"));
    }
    if data.len() != rows {
        return Err(format!("{name}: {} rows, expected {rows}", data.len()));
    }
    for (i, row) in data.iter().enumerate() {
        for &(c, lo, hi, na) in cols {
            check_real(&row[c], lo, hi, na, &format!("{name} row {i} col {c}"))?;
        }
    }
    Ok(())
}

/// Checks every output of [`run_pipeline`] against its expected layout.
pub fn validate(dir: &Path) -> Result<(), String> {
    for d in ["corpus", "lda", "nmf", "refset", "pairs", "matcher", "coverage", "sizes", "stability", "coherence", "correlate"] {
        let meta: serde_json::Value = serde_json::from_slice(&fs::read(dir.join(d).join("meta.json")).map_err(|e| format!("{d}: {e}"))?)
            .map_err(|e| format!("{d}/meta.json: {e}"))?;
        if meta["toolkit_version"].as_str().is_none() || meta["config"].is_null() {
            return Err(format!("{d}/meta.json lacks version or config echo"));
        }
    }
    let corpus = topcov::corpus::Corpus::read_archive(&dir.join("corpus")).map_err(|e| e.to_string())?;
    if corpus.num_docs() != 200 {
        return Err(format!("corpus has {} documents", corpus.num_docs()));
    }
    for m in LDA.iter().chain(&NMF) {
        let model = TopicModel::load(&dir.join(m)).map_err(|e| format!("{m}: {e}"))?;
        if model.num_topics() != 8 || model.vocab_size != corpus.vocab_size() || model.num_docs != 200 {
            return Err(format!("{m}: unexpected shape"));
        }
    }
    let refset = ReferenceTopicSet::load(&dir.join("refset/refset.json")).map_err(|e| e.to_string())?;
    if refset.len() != 8 || refset.categories.is_none() {
        return Err("refset: expected 8 categorized topics".into());
    }
    LogisticModel::from_json(&fs::read(dir.join("matcher/matcher.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;

    let (h, pairs) = read_csv(&dir.join("pairs/pairs.csv"))?;
    if h.len() != 7 || pairs.is_empty() {
        return Err("pairs.csv: bad layout".into());
    }
    check_table(dir, "coverage/coverage.csv", &["model_id", "model_type", "num_topics", "aucdc", "sup"], 4, &[(3, 0.0, 0.99, false), (4, 0.0, 1.0, false)])?;
    check_table(dir, "coverage/topic_scores.csv", &["model_id", "topic_index", "cos", "sup"], 32, &[(2, 0.0, 1.0, false)])?;
    for m in LDA.iter().chain(&NMF) {
        let id = Path::new(m).file_stem().unwrap().to_string_lossy();
        check_table(dir, &format!("coverage/cdc_{id}.csv"), &["threshold", "coverage"], 51, &[(0, 0.0, 1.0, false), (1, 0.0, 1.0, false)])?;
    }
    let svg = fs::read_to_string(dir.join("coverage/cdc.svg")).map_err(|e| e.to_string())?;
    if !svg.starts_with("<svg") || svg.matches("<polyline").count() < 4 {
        return Err("cdc.svg: expected one polyline per model".into());
    }
    let (_, sizes) = read_csv(&dir.join("sizes/sizes.csv"))?;
    if sizes.len() != 8 {
        return Err("sizes.csv: expected 8 rows".into());
    }
    let mut per_quartile = BTreeMap::new();
    for r in &sizes {
        *per_quartile.entry(r[3].clone()).or_insert(0) += 1;
    }
    if per_quartile.len() != 4 || per_quartile.values().any(|&n| n != 2) {
        return Err(format!("sizes.csv: quartiles {per_quartile:?}"));
    }
    check_table(
        dir,
        "stability/stability.csv",
        &["set_id", "n_instances", "instance_stabil", "refset_stabil", "aucdc_stabil", "wall_ms_instance", "wall_ms_aucdc"],
        2,
        &[(2, 0.0, 1.0, false), (3, 0.0, 1.0, false), (4, 0.0, 0.99, false)],
    )?;
    check_table(dir, "coherence/coherence.csv", &["model_id", "topic_index", "npmi", "cp", "cv"], 32, &[(2, -1.0, 1.0, true), (3, -1.0, 1.0, true), (4, 0.0, 1.0, true)])?;
    let analysis: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("correlate/analysis.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let results = analysis["results"].as_array().ok_or("analysis.json: no results")?;
    for r in results {
        for k in ["statistic", "point", "lo", "hi", "n_resamples", "seed", "discarded"] {
            if r.get(k).is_none() {
                return Err(format!("analysis.json: result lacks {k}"));
            }
        }
    }
    Ok(())
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_owned()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_owned());
            }
        }
    }
    out.sort();
    out
}

/// Drops the timing columns, which are the only non-deterministic values.
fn without_timings(text: &str) -> String {
    text.lines().map(|l| l.split(',').take(5).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join("\n")
}

/// Names of files whose contents differ between two pipeline runs.
pub fn compare_runs(a: &Path, b: &Path) -> Vec<String> {
    let (fa, fb) = (files(a), files(b));
    if fa != fb {
        return vec![format!("file lists differ: {fa:?} vs {fb:?}")];
    }
    let mut diff = Vec::new();
    for f in fa {
        let (x, y) = (fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap());
        let same = if f.ends_with("stability/stability.csv") {
            without_timings(&String::from_utf8_lossy(&x)) == without_timings(&String::from_utf8_lossy(&y))
        } else {
            x == y
        };
        if !same {
            diff.push(f.display().to_string());
        }
    }
    diff
}
