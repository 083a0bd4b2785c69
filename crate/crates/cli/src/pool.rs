//! Loading model files and addressing their topics by reference strings:
//! `<model_id>:<index>` for model topics and `ref:<index>` for reference
//! topics, where `model_id` is the model file name without extension.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use topcov::corpus::Corpus;
use topcov::{ReferenceTopicSet, Topic, TopicModel};

use crate::error::{with_path, CliError, CliResult};

pub const REF_ID: &str = "ref";

pub struct LoadedModel {
    pub id: String,
    pub model: TopicModel,
}

pub fn model_id(path: &Path) -> CliResult<String> {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::usage(format!("cannot derive a model id from {}", path.display())))
}

pub fn load_models(paths: &[PathBuf]) -> CliResult<Vec<LoadedModel>> {
    let mut seen = HashMap::new();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let id = model_id(p)?;
        if id == REF_ID {
            return Err(CliError::usage(format!("model id {REF_ID:?} is reserved")).at(p));
        }
        if let Some(prev) = seen.insert(id.clone(), p.clone()) {
            return Err(CliError::usage(format!("model id {id:?} used by both {} and {}", prev.display(), p.display())));
        }
        let model = with_path(p, TopicModel::load(p))?;
        out.push(LoadedModel { id, model });
    }
    Ok(out)
}

pub fn load_refset(path: &Path) -> CliResult<ReferenceTopicSet> {
    with_path(path, ReferenceTopicSet::load(path))
}

pub fn load_corpus(dir: &Path) -> CliResult<Corpus> {
    with_path(dir, Corpus::read_archive(dir))
}

/// Word and document dimensions every loaded topic must share.
pub fn check_dims<'t>(what: &str, topics: impl IntoIterator<Item = &'t Topic>, vocab: usize, docs: usize) -> CliResult<()> {
    for (i, t) in topics.into_iter().enumerate() {
        let (v, n) = (t.word_weights().dim(), t.doc_weights().dim());
        if v != vocab || n != docs {
            return Err(CliError::incompatible(format!(
                "{what} topic {i} is defined over {v} words and {n} documents, expected {vocab} and {docs}"
            )));
        }
    }
    Ok(())
}

pub fn check_against_corpus(models: &[LoadedModel], refset: Option<&ReferenceTopicSet>, corpus: &Corpus) -> CliResult<()> {
    let (v, n) = (corpus.vocab_size(), corpus.num_docs());
    for m in models {
        check_dims(&m.id, &m.model.topics, v, n)?;
    }
    if let Some(r) = refset {
        check_dims("reference", &r.topics, v, n)?;
    }
    Ok(())
}

/// All topics of several models plus an optional reference set, in file order.
pub struct TopicPool<'a> {
    refs: Vec<String>,
    topics: Vec<&'a Topic>,
    index: HashMap<String, usize>,
}

impl<'a> TopicPool<'a> {
    pub fn new(models: &'a [LoadedModel], refset: Option<&'a ReferenceTopicSet>) -> CliResult<Self> {
        let mut pool = Self { refs: Vec::new(), topics: Vec::new(), index: HashMap::new() };
        for m in models {
            for (i, t) in m.model.topics.iter().enumerate() {
                pool.add(format!("{}:{i}", m.id), t);
            }
        }
        if let Some(r) = refset {
            for (i, t) in r.topics.iter().enumerate() {
                pool.add(format!("{REF_ID}:{i}"), t);
            }
        }
        if let Some(first) = pool.topics.first() {
            let (v, n) = (first.word_weights().dim(), first.doc_weights().dim());
            check_dims("pooled", pool.topics.iter().copied(), v, n)?;
        }
        Ok(pool)
    }

    fn add(&mut self, r: String, t: &'a Topic) {
        self.index.insert(r.clone(), self.topics.len());
        self.refs.push(r);
        self.topics.push(t);
    }

    pub fn reference(&self, i: usize) -> &str {
        &self.refs[i]
    }

    pub fn topic(&self, i: usize) -> &'a Topic {
        self.topics[i]
    }

    pub fn owned_topics(&self) -> Vec<Topic> {
        self.topics.iter().map(|&t| t.clone()).collect()
    }

    pub fn resolve(&self, r: &str) -> CliResult<&'a Topic> {
        self.index
            .get(r)
            .map(|&i| self.topics[i])
            .ok_or_else(|| CliError::incompatible(format!("unknown topic reference {r:?}")))
    }
}
