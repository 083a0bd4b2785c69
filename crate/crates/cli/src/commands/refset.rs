use std::io::BufRead;

use serde::Deserialize;
use topcov::corpus::tfidf;
use topcov::topics::{build_reference_topic, Preference};
use topcov::ReferenceTopicSet;

use crate::config::RunConfig;
use crate::error::{with_path, CliError, CliResult};
use crate::output::{ensure_dir, write_file, Meta};
use crate::pool::{load_corpus, load_refset};
use crate::RefsetArgs;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Annotation {
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    category: Option<String>,
    preference: Preference,
    words: Vec<String>,
    /// Input-collection document ids.
    docs: Vec<String>,
}

fn read_annotations(args: &RefsetArgs) -> CliResult<Vec<Annotation>> {
    let file = with_path(&args.annotations, std::fs::File::open(&args.annotations))?;
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = with_path(&args.annotations, line)?;
        if line.trim().is_empty() {
            continue;
        }
        let a: Annotation = serde_json::from_str(&line)
            .map_err(|e| CliError::new("parse", format!("line {}: {e}", n + 1)).at(&args.annotations))?;
        out.push(a);
    }
    if out.is_empty() {
        return Err(CliError::new("parse", "no reference topics").at(&args.annotations));
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig, args: &RefsetArgs) -> CliResult<()> {
    let c = &cfg.refset;
    let corpus = load_corpus(&args.corpus)?;
    let annotations = read_annotations(args)?;
    let weights = tfidf(&corpus);

    let mut topics = Vec::with_capacity(annotations.len());
    for (i, a) in annotations.iter().enumerate() {
        // Annotated words and documents missing from the filtered corpus are
        // skipped; a topic left with none of either is an error.
        let mut word_ids = Vec::new();
        for w in &a.words {
            match corpus.dictionary.id(&w.to_lowercase()) {
                Some(id) => word_ids.push(id),
                None => log::warn!("reference topic {i}: word {w:?} not in dictionary"),
            }
        }
        let mut doc_ids = Vec::new();
        for d in &a.docs {
            match corpus.doc_by_source_id(d) {
                Some(id) => doc_ids.push(id),
                None => log::warn!("reference topic {i}: document {d:?} not in corpus"),
            }
        }
        word_ids.sort_unstable();
        word_ids.dedup();
        let topic = build_reference_topic(&word_ids, &doc_ids, a.preference, &c.weights, &weights)
            .map_err(|e| CliError::from(e).at(&args.annotations))
            .map_err(|mut e| {
                e.msg = format!("reference topic {i}: {}", e.msg);
                e
            })?;
        topics.push(match &a.label {
            Some(l) => topic.with_label(l.clone()),
            None => topic,
        });
    }
    let mut refset = ReferenceTopicSet::new(topics);
    if annotations.iter().any(|a| a.category.is_some()) {
        refset = refset.with_categories(annotations.iter().map(|a| a.category.clone().unwrap_or_default()).collect())?;
    }

    ensure_dir(&args.out)?;
    let path = args.out.join("refset.json");
    write_file(&path, &refset.to_json()?)?;
    if load_refset(&path)?.len() != refset.len() {
        return Err(CliError::new("validation", "reference set does not read back").at(&path));
    }
    let mut meta = Meta::new("refset", vec![], c)?;
    meta.input("corpus", &args.corpus)?;
    meta.input("annotations", &args.annotations)?;
    meta.output(&path);
    meta.write(&args.out)
}
