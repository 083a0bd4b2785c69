use std::collections::BTreeSet;

use serde_json::Value;
use topcov::corpus::{Corpus, PreprocessConfig, PreprocessEcho};

use crate::config::RunConfig;
use crate::error::{with_path, CliError, CliResult};
use crate::output::{ensure_dir, write_json, Meta};
use crate::IngestArgs;

pub fn run(cfg: &RunConfig, args: &IngestArgs) -> CliResult<()> {
    let mut c = cfg.ingest.clone();
    if args.stopwords.is_some() {
        c.stopwords = args.stopwords.clone();
    }
    c.min_freq = args.min_freq.unwrap_or(c.min_freq);
    c.max_doc_frac = args.max_doc_frac.unwrap_or(c.max_doc_frac);
    c.min_token_len = args.min_token_len.unwrap_or(c.min_token_len);

    let stopwords: BTreeSet<String> = match &c.stopwords {
        Some(p) => with_path(p, std::fs::read_to_string(p))?
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect(),
        None => BTreeSet::new(),
    };
    let pre = PreprocessConfig {
        stopwords,
        min_freq: c.min_freq,
        max_doc_frac: c.max_doc_frac,
        min_token_len: c.min_token_len,
        ..Default::default()
    };
    let corpus = with_path(&args.input, Corpus::ingest(&args.input, &pre))?;
    ensure_dir(&args.out)?;
    let echo = PreprocessEcho::from(&pre);
    with_path(&args.out, corpus.write_archive(&args.out, Some(&echo)))?;
    log::info!("ingested {} documents, {} words", corpus.num_docs(), corpus.vocab_size());

    // The archive's own meta.json carries N, V and the preprocessing echo;
    // the run record is merged into it.
    let meta_path = args.out.join("meta.json");
    let mut archive: Value = with_path(&meta_path, serde_json::from_slice(&with_path(&meta_path, std::fs::read(&meta_path))?))?;
    let mut meta = Meta::new("ingest", vec![], &c)?;
    meta.input("input", &args.input)?;
    meta.input("stopwords", &c.stopwords)?;
    for f in ["dictionary.txt", "docs.jsonl", "meta.json"] {
        meta.output(&args.out.join(f));
    }
    let Value::Object(run) = meta.to_value() else { unreachable!() };
    let obj = archive.as_object_mut().ok_or_else(|| CliError::new("format", "archive meta is not an object"))?;
    for (k, v) in run {
        obj.entry(k).or_insert(v);
    }
    write_json(&meta_path, &archive)?;

    let back = with_path(&args.out, Corpus::read_archive(&args.out))?;
    if back.num_docs() != corpus.num_docs() || back.vocab_size() != corpus.vocab_size() {
        return Err(CliError::new("validation", "archive does not read back to the ingested corpus").at(&args.out));
    }
    Ok(())
}
