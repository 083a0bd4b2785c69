//! Topics, topic models, reference topic sets and their file formats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{write_atomic, TfIdf};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

/// A weighted list of words and documents.
#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    word_weights: SparseVector,
    doc_weights: SparseVector,
    pub label: Option<String>,
}

impl Topic {
    pub fn new(word_weights: SparseVector, doc_weights: SparseVector) -> Result<Self> {
        if !word_weights.is_non_negative() || !doc_weights.is_non_negative() {
            return Err(Error::arg("topic weights must be non-negative"));
        }
        if word_weights.is_zero() && doc_weights.is_zero() {
            return Err(Error::arg("topic has neither word nor document weights"));
        }
        Ok(Self { word_weights, doc_weights, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn word_weights(&self) -> &SparseVector {
        &self.word_weights
    }

    pub fn doc_weights(&self) -> &SparseVector {
        &self.doc_weights
    }
}

/// The `k` largest word weights in descending order, ties broken by ascending
/// word id. Zero weights are never returned.
pub fn top_words(topic: &Topic, k: usize) -> Vec<(u32, f64)> {
    top_entries(topic.word_weights(), k)
}

pub(crate) fn top_entries(v: &SparseVector, k: usize) -> Vec<(u32, f64)> {
    let mut entries: Vec<(u32, f64)> = v.iter().filter(|e| e.1 > 0.0).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    entries.truncate(k);
    entries
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelType {
    Lda,
    FixedLda,
    Nmf,
    External,
}

impl std::fmt::Display for ModelType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelType::Lda => "LDA",
            ModelType::FixedLda => "FIXED_LDA",
            ModelType::Nmf => "NMF",
            ModelType::External => "EXTERNAL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub topics: Vec<Topic>,
    pub model_type: ModelType,
    pub seed: u64,
    /// Dictionary size the word vectors are defined over.
    pub vocab_size: usize,
    /// Corpus size the document vectors are defined over.
    pub num_docs: usize,
}

impl TopicModel {
    pub fn new(topics: Vec<Topic>, model_type: ModelType, seed: u64) -> Result<Self> {
        let first = topics.first().ok_or_else(|| Error::Invariant("topic model with T=0".into()))?;
        let (v, n) = (first.word_weights.dim(), first.doc_weights.dim());
        check_dims(&topics, v, n)?;
        Ok(Self { topics, model_type, seed, vocab_size: v, num_docs: n })
    }

    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }
}

fn check_dims(topics: &[Topic], v: usize, n: usize) -> Result<()> {
    for (i, t) in topics.iter().enumerate() {
        if t.word_weights.dim() != v || t.doc_weights.dim() != n {
            return Err(Error::Invariant(format!(
                "topic {i} has dimensions ({}, {}), expected ({v}, {n})",
                t.word_weights.dim(),
                t.doc_weights.dim()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTopicSet {
    pub topics: Vec<Topic>,
    pub sizes: Option<Vec<usize>>,
    pub categories: Option<Vec<String>>,
}

impl ReferenceTopicSet {
    pub fn new(topics: Vec<Topic>) -> Self {
        Self { topics, sizes: None, categories: None }
    }

    pub fn with_sizes(mut self, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != self.topics.len() {
            return Err(Error::Invariant("sizes length differs from topic count".into()));
        }
        self.sizes = Some(sizes);
        Ok(self)
    }

    pub fn with_categories(mut self, categories: Vec<String>) -> Result<Self> {
        if categories.len() != self.topics.len() {
            return Err(Error::Invariant("categories length differs from topic count".into()));
        }
        self.categories = Some(categories);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// The subset of reference topics at `indices`, keeping annotations.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            topics: indices.iter().map(|&i| self.topics[i].clone()).collect(),
            sizes: self.sizes.as_ref().map(|s| indices.iter().map(|&i| s[i]).collect()),
            categories: self.categories.as_ref().map(|c| indices.iter().map(|&i| c[i].clone()).collect()),
        }
    }

    /// Views a model's topics as a reference set.
    pub fn from_model(model: &TopicModel) -> Self {
        Self::new(model.topics.clone())
    }
}

/// Whether a reference topic is best described by its words, its documents,
/// or both equally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    Words,
    Docs,
    Both,
}

/// `(word weight, document weight)` mixing coefficients for each preference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceWeights {
    pub words: (f64, f64),
    pub docs: (f64, f64),
    pub both: (f64, f64),
}

impl Default for PreferenceWeights {
    fn default() -> Self {
        Self { words: (0.8, 0.2), docs: (0.2, 0.8), both: (0.5, 0.5) }
    }
}

impl PreferenceWeights {
    pub fn get(&self, p: Preference) -> (f64, f64) {
        match p {
            Preference::Words => self.words,
            Preference::Docs => self.docs,
            Preference::Both => self.both,
        }
    }
}

/// Reference topic from annotated word and document lists: the document vector
/// is the indicator of `doc_ids`, the word vector mixes the indicator of
/// `word_ids` with the mean tf-idf row of `doc_ids`.
pub fn build_reference_topic(
    word_ids: &[u32],
    doc_ids: &[u32],
    preference: Preference,
    weights: &PreferenceWeights,
    tfidf: &TfIdf,
) -> Result<Topic> {
    if word_ids.is_empty() || doc_ids.is_empty() {
        return Err(Error::arg("reference topic needs at least one word and one document"));
    }
    let mut docs = doc_ids.to_vec();
    docs.sort_unstable();
    docs.dedup();
    let words_vec = SparseVector::indicator(tfidf.vocab_size(), word_ids.iter().copied())?;
    let docs_vec = SparseVector::indicator(tfidf.num_docs(), docs.iter().copied())?;
    let avg = tfidf.average_rows(&docs)?;
    let (ww, dw) = weights.get(preference);
    let word_weights = words_vec.linear_combination(ww, &avg, dw)?;
    Topic::new(word_weights, docs_vec)
}

const FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT: &str = "topcov-model";
const REFSET_FORMAT: &str = "topcov-refset";

#[derive(Serialize, Deserialize)]
struct TopicRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    words: Vec<(u32, f64)>,
    docs: Vec<(u32, f64)>,
}

impl TopicRecord {
    fn from_topic(t: &Topic) -> Self {
        Self { label: t.label.clone(), words: t.word_weights.iter().collect(), docs: t.doc_weights.iter().collect() }
    }

    fn into_topic(self, v: usize, n: usize, index: usize) -> Result<Topic> {
        let ctx = |e: Error| Error::Invariant(format!("topic {index}: {e}"));
        let words = SparseVector::from_pairs(v, self.words).map_err(ctx)?;
        let docs = SparseVector::from_pairs(n, self.docs).map_err(ctx)?;
        let mut t = Topic::new(words, docs).map_err(ctx)?;
        t.label = self.label;
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model_type: ModelType,
    #[serde(rename = "T")]
    t: usize,
    seed: u64,
    #[serde(rename = "V")]
    v: usize,
    #[serde(rename = "N")]
    n: usize,
    topics: Vec<TopicRecord>,
}

#[derive(Serialize, Deserialize)]
struct RefsetFile {
    format: String,
    version: u32,
    #[serde(rename = "V")]
    v: usize,
    #[serde(rename = "N")]
    n: usize,
    topics: Vec<TopicRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
}

fn check_header(format: &str, expected: &str, version: u32) -> Result<()> {
    if format != expected {
        return Err(Error::Format(format!("expected {expected} file, found {format:?}")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    Ok(())
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))
}

impl TopicModel {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: FORMAT_VERSION,
            model_type: self.model_type,
            t: self.topics.len(),
            seed: self.seed,
            v: self.vocab_size,
            n: self.num_docs,
            topics: self.topics.iter().map(TopicRecord::from_topic).collect(),
        };
        Ok(serde_json::to_vec(&file)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: ModelFile = parse_json(bytes)?;
        check_header(&file.format, MODEL_FORMAT, file.version)?;
        if file.t == 0 || file.topics.is_empty() {
            return Err(Error::Invariant("topic model with T=0".into()));
        }
        if file.t != file.topics.len() {
            return Err(Error::Invariant(format!("header T={} but {} topics stored", file.t, file.topics.len())));
        }
        let topics = file
            .topics
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.into_topic(file.v, file.n, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { topics, model_type: file.model_type, seed: file.seed, vocab_size: file.v, num_docs: file.n })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read(path)?)
    }
}

impl ReferenceTopicSet {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let (v, n) = self
            .topics
            .first()
            .map(|t| (t.word_weights.dim(), t.doc_weights.dim()))
            .unwrap_or((0, 0));
        let file = RefsetFile {
            format: REFSET_FORMAT.into(),
            version: FORMAT_VERSION,
            v,
            n,
            topics: self.topics.iter().map(TopicRecord::from_topic).collect(),
            sizes: self.sizes.clone(),
            categories: self.categories.clone(),
        };
        Ok(serde_json::to_vec(&file)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: RefsetFile = parse_json(bytes)?;
        check_header(&file.format, REFSET_FORMAT, file.version)?;
        let topics = file
            .topics
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.into_topic(file.v, file.n, i))
            .collect::<Result<Vec<_>>>()?;
        let mut set = Self::new(topics);
        if let Some(s) = file.sizes {
            set = set.with_sizes(s)?;
        }
        if let Some(c) = file.categories {
            set = set.with_categories(c)?;
        }
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read(path)?)
    }
}
