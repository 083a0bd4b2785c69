//! Document ingestion, vocabulary filtering, tf-idf weighting and the on-disk
//! corpus archive.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

/// Morphological normalization hook applied to every token after stopword
/// removal.
pub trait Stemmer: Send + Sync {
    fn stem(&self, token: &str) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityStemmer;

impl Stemmer for IdentityStemmer {
    fn stem(&self, token: &str) -> String {
        token.to_owned()
    }
}

#[derive(Clone)]
pub struct PreprocessConfig {
    pub stopwords: BTreeSet<String>,
    /// Words with a total corpus frequency below this are dropped.
    pub min_freq: u64,
    /// Words occurring in more than this fraction of documents are dropped.
    pub max_doc_frac: f64,
    /// Tokens shorter than this (in characters) are discarded.
    pub min_token_len: usize,
    pub stemmer: Arc<dyn Stemmer>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stopwords: BTreeSet::new(),
            min_freq: 4,
            max_doc_frac: 0.5,
            min_token_len: 2,
            stemmer: Arc::new(IdentityStemmer),
        }
    }
}

impl std::fmt::Debug for PreprocessConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PreprocessConfig")
            .field("stopwords", &self.stopwords.len())
            .field("min_freq", &self.min_freq)
            .field("max_doc_frac", &self.max_doc_frac)
            .field("min_token_len", &self.min_token_len)
            .finish()
    }
}

/// Serializable echo of a [`PreprocessConfig`], written into archive metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessEcho {
    pub stopword_count: usize,
    pub min_freq: u64,
    pub max_doc_frac: f64,
    pub min_token_len: usize,
}

impl From<&PreprocessConfig> for PreprocessEcho {
    fn from(c: &PreprocessConfig) -> Self {
        Self {
            stopword_count: c.stopwords.len(),
            min_freq: c.min_freq,
            max_doc_frac: c.max_doc_frac,
            min_token_len: c.min_token_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dictionary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Dictionary {
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::Invariant(format!("duplicate dictionary word {w:?}")));
            }
        }
        Ok(Self { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: u32,
    /// Identifier from the input collection.
    pub source_id: String,
    pub summary: String,
    /// Filtered token ids in reading order.
    pub tokens: Vec<u32>,
    /// `(word id, count)` sorted by word id.
    pub counts: Vec<(u32, u32)>,
}

impl Document {
    fn new(id: u32, source_id: String, summary: String, tokens: Vec<u32>) -> Self {
        let counts = count_tokens(&tokens);
        Self { id, source_id, summary, tokens, counts }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn count(&self, word: u32) -> u32 {
        match self.counts.binary_search_by_key(&word, |c| c.0) {
            Ok(k) => self.counts[k].1,
            Err(_) => 0,
        }
    }
}

fn count_tokens(tokens: &[u32]) -> Vec<(u32, u32)> {
    let mut sorted = tokens.to_vec();
    sorted.sort_unstable();
    let mut counts: Vec<(u32, u32)> = Vec::new();
    for t in sorted {
        match counts.last_mut() {
            Some((w, c)) if *w == t => *c += 1,
            _ => counts.push((t, 1)),
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub dictionary: Dictionary,
    pub documents: Vec<Document>,
}

/// One input record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

/// Lowercases and splits on non-alphabetic characters, keeping tokens of at
/// least `min_len` characters.
pub fn tokenize(text: &str, min_len: usize) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty() && t.chars().count() >= min_len)
        .map(str::to_lowercase)
        .collect()
}

const SUMMARY_CHARS: usize = 120;

fn summary_of(raw: &RawDocument) -> String {
    if !raw.title.trim().is_empty() {
        return raw.title.trim().to_owned();
    }
    raw.text.chars().take(SUMMARY_CHARS).collect::<String>().trim().to_owned()
}

impl Corpus {
    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.dictionary.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    /// Reads a JSON-lines document collection and preprocesses it.
    pub fn ingest(path: &Path, config: &PreprocessConfig) -> Result<Self> {
        let file = fs::File::open(path)?;
        let mut raws = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawDocument = serde_json::from_str(&line)
                .map_err(|e| Error::Parse { line: n + 1, msg: e.to_string() })?;
            raws.push(raw);
        }
        Self::from_raw(&raws, config)
    }

    /// Builds a corpus from plain texts; ids are the positions as strings.
    pub fn from_texts<S: AsRef<str>>(texts: &[S], config: &PreprocessConfig) -> Result<Self> {
        let raws: Vec<RawDocument> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| RawDocument { id: i.to_string(), title: String::new(), text: t.as_ref().to_owned() })
            .collect();
        Self::from_raw(&raws, config)
    }

    pub fn from_raw(raws: &[RawDocument], config: &PreprocessConfig) -> Result<Self> {
        let docs: Vec<Vec<String>> = raws
            .iter()
            .map(|r| {
                tokenize(&r.text, config.min_token_len)
                    .into_iter()
                    .filter(|t| !config.stopwords.contains(t))
                    .map(|t| config.stemmer.stem(&t))
                    .collect()
            })
            .collect();

        let mut freq: HashMap<&str, (u64, u64)> = HashMap::new();
        for doc in &docs {
            let mut seen = BTreeSet::new();
            for t in doc {
                let e = freq.entry(t.as_str()).or_default();
                e.0 += 1;
                if seen.insert(t.as_str()) {
                    e.1 += 1;
                }
            }
        }
        let n = docs.len().max(1) as f64;
        let mut words: Vec<String> = freq
            .iter()
            .filter(|(_, &(total, df))| total >= config.min_freq && df as f64 / n <= config.max_doc_frac)
            .map(|(w, _)| (*w).to_owned())
            .collect();
        if words.is_empty() {
            return Err(Error::Config("preprocessing left an empty dictionary".into()));
        }
        words.sort();
        let dictionary = Dictionary::from_words(words)?;

        let documents = raws
            .iter()
            .zip(docs)
            .enumerate()
            .map(|(i, (raw, toks))| {
                let ids = toks.iter().filter_map(|t| dictionary.id(t)).collect();
                Document::new(i as u32, raw.id.clone(), summary_of(raw), ids)
            })
            .collect();
        Ok(Self { dictionary, documents })
    }

    /// Builds a corpus directly from token-id sequences (used by generators).
    pub fn from_token_ids(dictionary: Dictionary, docs: Vec<Vec<u32>>) -> Result<Self> {
        let v = dictionary.len() as u32;
        let documents = docs
            .into_iter()
            .enumerate()
            .map(|(i, toks)| {
                if let Some(&bad) = toks.iter().find(|&&t| t >= v) {
                    return Err(Error::Invariant(format!("token id {bad} outside dictionary of size {v}")));
                }
                Ok(Document::new(i as u32, i.to_string(), format!("doc {i}"), toks))
            })
            .collect::<Result<_>>()?;
        Ok(Self { dictionary, documents })
    }

    /// Document id for an input-collection identifier.
    pub fn doc_by_source_id(&self, source_id: &str) -> Option<u32> {
        self.documents.iter().find(|d| d.source_id == source_id).map(|d| d.id)
    }

    /// Writes `dictionary.txt`, `docs.jsonl` and `meta.json` into `dir`.
    pub fn write_archive(&self, dir: &Path, config: Option<&PreprocessEcho>) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut dict = String::new();
        for w in self.dictionary.words() {
            dict.push_str(w);
            dict.push('\n');
        }
        write_atomic(&dir.join("dictionary.txt"), dict.as_bytes())?;

        let mut docs = Vec::new();
        for d in &self.documents {
            let rec = DocRecord {
                id: d.id,
                source_id: d.source_id.clone(),
                summary: d.summary.clone(),
                counts: d.counts.iter().map(|(w, c)| format!("{w}:{c}")).collect(),
                tokens: d.tokens.clone(),
            };
            serde_json::to_writer(&mut docs, &rec)?;
            docs.push(b'\n');
        }
        write_atomic(&dir.join("docs.jsonl"), &docs)?;

        let meta = ArchiveMeta { n: self.num_docs(), v: self.vocab_size(), config: config.cloned() };
        write_atomic(&dir.join("meta.json"), &serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }

    pub fn read_archive(dir: &Path) -> Result<Self> {
        let dict_text = fs::read_to_string(dir.join("dictionary.txt"))?;
        let words: Vec<String> = dict_text.lines().map(str::to_owned).collect();
        let dictionary = Dictionary::from_words(words)?;
        let meta: ArchiveMeta = serde_json::from_slice(&fs::read(dir.join("meta.json"))?)?;

        let file = fs::File::open(dir.join("docs.jsonl"))?;
        let mut documents = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: n + 1, msg };
            let rec: DocRecord = serde_json::from_str(&line).map_err(|e| perr(e.to_string()))?;
            if rec.id as usize != documents.len() {
                return Err(perr(format!("document id {} out of sequence", rec.id)));
            }
            let doc = Document::new(rec.id, rec.source_id, rec.summary, rec.tokens);
            let counts = rec
                .counts
                .iter()
                .map(|s| parse_count_pair(s).ok_or_else(|| perr(format!("bad count pair {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if counts != doc.counts {
                return Err(perr("counts disagree with token sequence".into()));
            }
            if doc.tokens.iter().any(|&t| t as usize >= dictionary.len()) {
                return Err(perr("token id outside dictionary".into()));
            }
            documents.push(doc);
        }
        if meta.n != documents.len() || meta.v != dictionary.len() {
            return Err(Error::Format(format!(
                "meta.json declares N={} V={}, archive holds N={} V={}",
                meta.n,
                meta.v,
                documents.len(),
                dictionary.len()
            )));
        }
        Ok(Self { dictionary, documents })
    }
}

fn parse_count_pair(s: &str) -> Option<(u32, u32)> {
    let (a, b) = s.split_once(':')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

#[derive(Serialize, Deserialize)]
struct DocRecord {
    id: u32,
    source_id: String,
    summary: String,
    counts: Vec<String>,
    tokens: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct ArchiveMeta {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "V")]
    v: usize,
    config: Option<PreprocessEcho>,
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::arg(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Row-normalized tf-idf weights, one sparse row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdf {
    rows: Vec<SparseVector>,
    idf: Vec<f64>,
}

impl TfIdf {
    /// `count * (ln((1+N)/(1+df)) + 1)`, then each row scaled to unit L2 norm.
    pub fn new(corpus: &Corpus) -> Self {
        let n = corpus.num_docs();
        let v = corpus.vocab_size();
        let mut df = vec![0u64; v];
        for d in &corpus.documents {
            for &(w, _) in &d.counts {
                df[w as usize] += 1;
            }
        }
        let idf: Vec<f64> = df
            .iter()
            .map(|&f| ((1.0 + n as f64) / (1.0 + f as f64)).ln() + 1.0)
            .collect();
        let rows = crate::par::map_slice(&corpus.documents, |d| {
            let raw: Vec<f64> = d.counts.iter().map(|&(w, c)| c as f64 * idf[w as usize]).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let pairs = d
                .counts
                .iter()
                .zip(raw)
                .map(|(&(w, _), x)| (w, if norm > 0.0 { x / norm } else { 0.0 }));
            SparseVector::from_pairs(v, pairs).expect("word ids are valid")
        });
        Self { rows, idf }
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn row(&self, doc: u32) -> &SparseVector {
        &self.rows[doc as usize]
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn num_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.idf.len()
    }

    /// Component-wise mean of the selected rows.
    pub fn average_rows(&self, doc_ids: &[u32]) -> Result<SparseVector> {
        if doc_ids.is_empty() {
            return Err(Error::arg("average of an empty document set"));
        }
        let mut acc = vec![0.0; self.vocab_size()];
        for &d in doc_ids {
            let row = self
                .rows
                .get(d as usize)
                .ok_or_else(|| Error::arg(format!("document id {d} out of range")))?;
            for (w, x) in row.iter() {
                acc[w as usize] += x;
            }
        }
        let k = doc_ids.len() as f64;
        acc.iter_mut().for_each(|x| *x /= k);
        Ok(SparseVector::from_dense(&acc))
    }

    /// Dense `N x V` copy.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.num_docs(), self.vocab_size());
        for (d, row) in self.rows.iter().enumerate() {
            for (w, x) in row.iter() {
                m[(d, w as usize)] = x;
            }
        }
        m
    }
}

pub fn tfidf(corpus: &Corpus) -> TfIdf {
    TfIdf::new(corpus)
}

pub fn average_tfidf(corpus: &Corpus, doc_ids: &[u32]) -> Result<SparseVector> {
    TfIdf::new(corpus).average_rows(doc_ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loose() -> PreprocessConfig {
        PreprocessConfig { min_freq: 1, max_doc_frac: 1.0, min_token_len: 1, ..Default::default() }
    }

    fn abc() -> Corpus {
        Corpus::from_texts(&["a b b", "b c", "a c"], &loose()).unwrap()
    }

    #[test]
    fn ingest_counts() {
        let c = abc();
        assert_eq!(c.dictionary.words(), &["a", "b", "c"]);
        let d0 = &c.documents[0];
        assert_eq!(d0.counts, vec![(0, 1), (1, 2)]);
        assert_eq!(d0.len(), 3);
    }

    #[test]
    fn stopwords_and_min_freq() {
        let mut cfg = loose();
        cfg.stopwords.insert("b".into());
        let c = Corpus::from_texts(&["a b b", "b c", "a c"], &cfg).unwrap();
        assert_eq!(c.dictionary.words(), &["a", "c"]);

        let cfg = PreprocessConfig { min_freq: 3, ..loose() };
        let c = Corpus::from_texts(&["a b b", "b c", "a c"], &cfg).unwrap();
        assert_eq!(c.dictionary.words(), &["b"]);
    }

    #[test]
    fn max_doc_fraction_and_empty_dictionary() {
        let cfg = PreprocessConfig { max_doc_frac: 0.5, ..loose() };
        // every word appears in 2 of 3 documents
        let err = Corpus::from_texts(&["a b b", "b c", "a c"], &cfg).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn default_tokenizer_drops_short_tokens() {
        assert_eq!(tokenize("The cat's x-ray, 42 Dogs!", 2), vec!["the", "cat", "ray", "dogs"]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.jsonl");
        fs::write(&p, "{\"id\":\"1\",\"title\":\"t\",\"text\":\"aa bb\"}\n{oops\n").unwrap();
        match Corpus::ingest(&p, &loose()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tfidf_examples() {
        let c = Corpus::from_texts(&["a a a a a"], &loose()).unwrap();
        assert_eq!(TfIdf::new(&c).row(0).to_dense(), vec![1.0]);

        let c = Corpus::from_texts(&["a", "a b"], &loose()).unwrap();
        let t = TfIdf::new(&c);
        assert_eq!(t.idf()[0], 1.0);
        let b_idf = (1.5f64).ln() + 1.0;
        assert!((t.idf()[1] - 1.4055).abs() < 1e-4);
        let norm = (1.0 + b_idf * b_idf).sqrt();
        let row = t.row(1).to_dense();
        assert!((row[0] - 1.0 / norm).abs() < 1e-12);
        assert!((row[1] - b_idf / norm).abs() < 1e-12);
        assert!((row[0] - 0.580).abs() < 1e-3 && (row[1] - 0.815).abs() < 1e-3);
    }

    #[test]
    fn tfidf_rows_unit_or_zero() {
        let c = Corpus::from_texts(&["a b", "", "c c a"], &loose()).unwrap();
        for r in TfIdf::new(&c).rows() {
            let n = r.norm();
            assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn average_examples() {
        let c = Corpus::from_texts(&["a", "b", "a"], &loose()).unwrap();
        let t = TfIdf::new(&c);
        assert_eq!(t.average_rows(&[1]).unwrap(), t.row(1).clone());
        assert_eq!(t.average_rows(&[0, 2]).unwrap(), t.row(0).clone());
        assert_eq!(t.average_rows(&[0, 1]).unwrap().to_dense(), vec![0.5, 0.5]);
        assert!(t.average_rows(&[]).is_err());
        assert!(t.average_rows(&[9]).is_err());
    }

    #[test]
    fn archive_round_trip() {
        let c = Corpus::from_texts(&["alpha beta beta", "beta gamma", "alpha gamma delta"], &loose()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        c.write_archive(dir.path(), Some(&(&loose()).into())).unwrap();
        assert_eq!(Corpus::read_archive(dir.path()).unwrap(), c);
    }

    #[test]
    fn raising_min_freq_never_adds_words() {
        let texts = ["aa bb bb cc", "bb cc dd dd dd", "aa ee ee ee ee"];
        let mut prev: Option<BTreeSet<String>> = None;
        for m in 1..6 {
            let cfg = PreprocessConfig { min_freq: m, max_doc_frac: 1.0, ..Default::default() };
            let words: BTreeSet<String> = match Corpus::from_texts(&texts, &cfg) {
                Ok(c) => c.dictionary.words().iter().cloned().collect(),
                Err(_) => BTreeSet::new(),
            };
            if let Some(p) = &prev {
                assert!(words.is_subset(p));
            }
            prev = Some(words);
        }
    }
}
