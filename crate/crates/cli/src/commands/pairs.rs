use topcov::corpus::Corpus;
use topcov::matcher::sample_topic_pairs;
use topcov::topics::top_words;
use topcov::Topic;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{ensure_dir, Meta, Table};
use crate::pool::{check_against_corpus, load_corpus, load_models, load_refset, TopicPool};
use crate::PairsArgs;

/// Highest-weighted documents, ties broken by document id.
fn top_docs(topic: &Topic, k: usize) -> Vec<u32> {
    let mut docs: Vec<(u32, f64)> = topic.doc_weights().iter().filter(|&(_, w)| w > 0.0).collect();
    docs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    docs.into_iter().take(k).map(|(d, _)| d).collect()
}

fn describe(topic: &Topic, corpus: &Corpus, words: usize, docs: usize) -> (String, String) {
    let w: Vec<&str> =
        top_words(topic, words).into_iter().filter_map(|(id, _)| corpus.dictionary.word(id)).collect();
    let d: Vec<&str> = top_docs(topic, docs).into_iter().map(|id| corpus.documents[id as usize].summary.as_str()).collect();
    (w.join(" "), d.join(" | "))
}

pub fn run(cfg: &RunConfig, args: &PairsArgs) -> CliResult<()> {
    let mut c = cfg.pairs.clone();
    c.intervals = args.intervals.unwrap_or(c.intervals);
    c.per_interval = args.per_interval.unwrap_or(c.per_interval);

    let corpus = load_corpus(&args.corpus)?;
    let models = load_models(&args.models)?;
    let refset = args.refset.as_deref().map(load_refset).transpose()?;
    check_against_corpus(&models, refset.as_ref(), &corpus)?;
    let pool = TopicPool::new(&models, refset.as_ref())?;
    let pairs = sample_topic_pairs(&pool.owned_topics(), c.intervals, c.per_interval, cfg.seed)?;

    let mut export = Table::new(&["pair_id", "topic_a_ref", "topic_b_ref", "topic_a_words", "topic_a_docs", "topic_b_words", "topic_b_docs"]);
    let mut template = Table::new(&["pair_id", "topic_a_ref", "topic_b_ref", "label_1", "label_2", "label_3"]);
    let width = pairs.len().to_string().len();
    for (n, &(a, b)) in pairs.iter().enumerate() {
        let id = format!("p{n:0width$}");
        let (aw, ad) = describe(pool.topic(a), &corpus, c.top_words, c.top_docs);
        let (bw, bd) = describe(pool.topic(b), &corpus, c.top_words, c.top_docs);
        let (ra, rb) = (pool.reference(a).to_owned(), pool.reference(b).to_owned());
        template.push(vec![id.clone(), ra.clone(), rb.clone(), String::new(), String::new(), String::new()]);
        export.push(vec![id, ra, rb, aw, ad, bw, bd]);
    }

    ensure_dir(&args.out)?;
    let mut meta = Meta::new("pairs", vec![cfg.seed], &c)?;
    meta.input("corpus", &args.corpus)?;
    meta.input("models", &args.models)?;
    meta.input("refset", &args.refset)?;
    for (name, table) in [("pairs.csv", &export), ("annotation_template.csv", &template)] {
        let path = args.out.join(name);
        table.write(&path)?;
        meta.output(&path);
    }
    meta.write(&args.out)
}
