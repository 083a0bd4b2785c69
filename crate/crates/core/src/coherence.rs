//! Corpus-based topic coherence (NPMI, CP, CV) over sliding-window
//! co-occurrence statistics of a topic's top words.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::topics::{top_words, Topic};

pub const DEFAULT_TOP_N: usize = 10;
pub const DEFAULT_WINDOW_NPMI: usize = 10;
pub const DEFAULT_WINDOW_CP: usize = 70;
pub const DEFAULT_WINDOW_CV: usize = 110;

/// Set of window ids stored as a bitmap.
#[derive(Debug, Clone, PartialEq)]
struct WindowSet(Vec<u64>);

impl WindowSet {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn and_count(&self, other: &Self) -> u64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones() as u64).sum()
    }

    fn union_with(&mut self, other: &Self) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a |= b);
    }
}

/// Window occurrence statistics for a tracked set of words.
///
/// Each document contributes `len - window + 1` windows (one window when it is
/// shorter than `window_size`); a word or word set is counted once per window
/// it occurs in.
#[derive(Debug, Clone)]
pub struct CooccurrenceStats {
    window_size: usize,
    total_windows: u64,
    windows: HashMap<u32, WindowSet>,
}

impl CooccurrenceStats {
    /// Statistics for every dictionary word.
    pub fn count(corpus: &Corpus, window_size: usize) -> Result<Self> {
        let all: Vec<u32> = (0..corpus.vocab_size() as u32).collect();
        Self::count_words(corpus, window_size, &all)
    }

    /// Statistics restricted to `words`; other words are treated as unseen.
    pub fn count_words(corpus: &Corpus, window_size: usize, words: &[u32]) -> Result<Self> {
        if window_size < 1 {
            return Err(Error::arg("window size must be at least 1"));
        }
        let tracked: BTreeSet<u32> = words.iter().copied().collect();
        let n_windows: usize = corpus.documents.iter().map(|d| windows_in(d.len(), window_size)).sum();
        let mut windows: HashMap<u32, WindowSet> =
            tracked.iter().map(|&w| (w, WindowSet::new(n_windows))).collect();

        let mut offset = 0usize;
        for doc in &corpus.documents {
            let k = windows_in(doc.len(), window_size);
            // a token at position p lies in windows max(0, p-w+1) ..= min(p, k-1)
            for (p, tok) in doc.tokens.iter().enumerate() {
                if let Some(set) = windows.get_mut(tok) {
                    let lo = (p + 1).saturating_sub(window_size);
                    let hi = p.min(k - 1);
                    for w in lo..=hi {
                        set.insert(offset + w);
                    }
                }
            }
            offset += k;
        }
        Ok(Self { window_size, total_windows: n_windows as u64, windows })
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn total_windows(&self) -> u64 {
        self.total_windows
    }

    /// Smoothing constant `1 / total_windows`.
    pub fn epsilon(&self) -> f64 {
        1.0 / self.total_windows.max(1) as f64
    }

    pub fn is_tracked(&self, word: u32) -> bool {
        self.windows.contains_key(&word)
    }

    pub fn word_count(&self, word: u32) -> u64 {
        self.windows.get(&word).map_or(0, WindowSet::count)
    }

    pub fn pair_count(&self, a: u32, b: u32) -> u64 {
        match (self.windows.get(&a), self.windows.get(&b)) {
            (Some(x), Some(y)) => x.and_count(y),
            _ => 0,
        }
    }

    fn prob(&self, count: u64) -> f64 {
        count as f64 / self.total_windows.max(1) as f64
    }

    pub fn p_word(&self, w: u32) -> f64 {
        self.prob(self.word_count(w))
    }

    pub fn p_pair(&self, a: u32, b: u32) -> f64 {
        self.prob(self.pair_count(a, b))
    }

    fn union_of(&self, words: &[u32]) -> WindowSet {
        let mut acc = WindowSet::new(self.total_windows as usize);
        for w in words {
            if let Some(s) = self.windows.get(w) {
                acc.union_with(s);
            }
        }
        acc
    }
}

fn windows_in(len: usize, window: usize) -> usize {
    if len <= window {
        1
    } else {
        len - window + 1
    }
}

/// `ln((P(a,b)+e) / (P(a)P(b))) / -ln(P(a,b)+e)` with `e = 1/total_windows`.
///
/// Unseen marginals are floored at `e`; when `P(a,b)+e >= 1` the pair occurs in
/// (almost) every window and the value is 1. Results are clamped to `[-1, 1]`.
pub fn npmi(a: u32, b: u32, stats: &CooccurrenceStats) -> f64 {
    let eps = stats.epsilon();
    let joint = stats.p_pair(a, b) + eps;
    if joint >= 1.0 {
        return 1.0;
    }
    let pa = stats.p_word(a).max(eps);
    let pb = stats.p_word(b).max(eps);
    ((joint / (pa * pb)).ln() / -joint.ln()).clamp(-1.0, 1.0)
}

/// Top-`n` words of the topic that are tracked by `stats`, in weight order.
fn usable_top_words(topic: &Topic, stats: &CooccurrenceStats, top_n: usize) -> Vec<u32> {
    top_words(topic, top_n).into_iter().map(|(w, _)| w).filter(|&w| stats.is_tracked(w)).collect()
}

/// Mean NPMI over all unordered pairs of the top words; `None` with fewer
/// than two usable words.
pub fn coherence_npmi(topic: &Topic, stats: &CooccurrenceStats, top_n: usize) -> Option<f64> {
    let words = usable_top_words(topic, stats, top_n);
    mean_pairwise_npmi(&words, stats)
}

pub(crate) fn mean_pairwise_npmi(words: &[u32], stats: &CooccurrenceStats) -> Option<f64> {
    if words.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            total += npmi(words[i], words[j], stats);
            n += 1;
        }
    }
    Some(total / n as f64)
}

/// Difference confirmation `P(w | S) - P(w | not S)` where `S` is the event
/// "some member of the set occurs in the window".
pub fn confirmation(word: u32, set: &[u32], stats: &CooccurrenceStats) -> f64 {
    let total = stats.total_windows;
    let s = stats.union_of(set);
    let s_count = s.count();
    let w_count = stats.word_count(word);
    let both = stats.windows.get(&word).map_or(0, |w| w.and_count(&s));
    let p_given_s = if s_count > 0 { both as f64 / s_count as f64 } else { 0.0 };
    let not_s = total - s_count;
    if not_s == 0 {
        return p_given_s;
    }
    p_given_s - (w_count - both) as f64 / not_s as f64
}

/// Mean confirmation of each top word by the set of the remaining top words.
pub fn coherence_cp(topic: &Topic, stats: &CooccurrenceStats, top_n: usize) -> Option<f64> {
    let words = usable_top_words(topic, stats, top_n);
    if words.len() < 2 {
        return None;
    }
    let total: f64 = (0..words.len())
        .map(|i| {
            let rest: Vec<u32> = words.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &w)| w).collect();
            confirmation(words[i], &rest, stats)
        })
        .sum();
    Some(total / words.len() as f64)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Each top word becomes its vector of NPMI values against all top words
/// (self entry 1). Every word after the first is compared, by cosine, with
/// the sum of the vectors of all higher-weighted words; the score is the mean.
pub fn coherence_cv(topic: &Topic, stats: &CooccurrenceStats, top_n: usize) -> Option<f64> {
    let words = usable_top_words(topic, stats, top_n);
    cv_of_words(&words, stats)
}

pub(crate) fn cv_of_words(words: &[u32], stats: &CooccurrenceStats) -> Option<f64> {
    let n = words.len();
    if n < 2 {
        return None;
    }
    let vectors: Vec<Vec<f64>> = words
        .iter()
        .map(|&w| words.iter().map(|&u| if u == w { 1.0 } else { npmi(w, u, stats) }).collect())
        .collect();
    let mut acc = vectors[0].clone();
    let mut total = 0.0;
    for v in &vectors[1..] {
        total += cosine(v, &acc);
        acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
    }
    Some(total / (n - 1) as f64)
}

/// Coherence scores of one topic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceScores {
    pub npmi: Option<f64>,
    pub cp: Option<f64>,
    pub cv: Option<f64>,
}

/// Statistics for the three measures, each with its own window size.
pub struct CoherenceEvaluator {
    pub top_n: usize,
    npmi_stats: CooccurrenceStats,
    cp_stats: CooccurrenceStats,
    cv_stats: CooccurrenceStats,
}

impl CoherenceEvaluator {
    /// Tracks only the top words of `topics`, which keeps memory proportional
    /// to the evaluated vocabulary.
    pub fn new(corpus: &Corpus, topics: &[&Topic], top_n: usize, windows: [usize; 3]) -> Result<Self> {
        let words: Vec<u32> = topics
            .iter()
            .flat_map(|t| top_words(t, top_n).into_iter().map(|(w, _)| w))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let [wn, wp, wv] = windows;
        Ok(Self {
            top_n,
            npmi_stats: CooccurrenceStats::count_words(corpus, wn, &words)?,
            cp_stats: CooccurrenceStats::count_words(corpus, wp, &words)?,
            cv_stats: CooccurrenceStats::count_words(corpus, wv, &words)?,
        })
    }

    pub fn score(&self, topic: &Topic) -> CoherenceScores {
        CoherenceScores {
            npmi: coherence_npmi(topic, &self.npmi_stats, self.top_n),
            cp: coherence_cp(topic, &self.cp_stats, self.top_n),
            cv: coherence_cv(topic, &self.cv_stats, self.top_n),
        }
    }

    pub fn score_all(&self, topics: &[Topic]) -> Vec<CoherenceScores> {
        crate::par::map_slice(topics, |t| self.score(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PreprocessConfig;
    use crate::sparse::SparseVector;

    fn corpus(texts: &[&str]) -> Corpus {
        let cfg = PreprocessConfig { min_freq: 1, max_doc_frac: 1.0, min_token_len: 1, ..Default::default() };
        Corpus::from_texts(texts, &cfg).unwrap()
    }

    fn id(c: &Corpus, w: &str) -> u32 {
        c.dictionary.id(w).unwrap()
    }

    fn topic_over(c: &Corpus, words: &[&str]) -> Topic {
        let n = words.len() as f64;
        let pairs = words.iter().enumerate().map(|(i, w)| (id(c, w), n - i as f64));
        Topic::new(SparseVector::from_pairs(c.vocab_size(), pairs).unwrap(), SparseVector::from_dense(&[1.0])).unwrap()
    }

    #[test]
    fn single_window() {
        let c = corpus(&["a b"]);
        let s = CooccurrenceStats::count(&c, 2).unwrap();
        assert_eq!(s.total_windows(), 1);
        let (a, b) = (id(&c, "a"), id(&c, "b"));
        assert_eq!((s.p_word(a), s.p_word(b), s.p_pair(a, b)), (1.0, 1.0, 1.0));
    }

    #[test]
    fn three_token_windows() {
        let c = corpus(&["a b c"]);
        let s = CooccurrenceStats::count(&c, 2).unwrap();
        let (a, b, cc) = (id(&c, "a"), id(&c, "b"), id(&c, "c"));
        assert_eq!(s.total_windows(), 2);
        assert_eq!(s.p_word(b), 1.0);
        assert_eq!(s.p_word(a), 0.5);
        assert_eq!(s.p_word(cc), 0.5);
        assert_eq!(s.p_pair(a, cc), 0.0);
        assert!(CooccurrenceStats::count(&c, 0).is_err());
    }

    #[test]
    fn large_window_equals_document_cooccurrence() {
        let texts = ["a b c d", "b d e", "a e", "c c c a"];
        let c = corpus(&texts);
        let s = CooccurrenceStats::count(&c, 100).unwrap();
        assert_eq!(s.total_windows(), 4);
        for a in 0..c.vocab_size() as u32 {
            for b in 0..c.vocab_size() as u32 {
                let both = c.documents.iter().filter(|d| d.count(a) > 0 && d.count(b) > 0).count() as u64;
                assert_eq!(s.pair_count(a, b), both);
            }
        }
    }

    fn stats_from_probs(total: u64, pa: u64, pb: u64, pab: u64) -> CooccurrenceStats {
        // build windows directly: first pab windows hold both words
        let mut x = WindowSet::new(total as usize);
        let mut y = WindowSet::new(total as usize);
        for i in 0..pa {
            x.insert(i as usize);
        }
        for i in 0..pab {
            y.insert(i as usize);
        }
        for i in 0..pb - pab {
            y.insert((pa + i) as usize);
        }
        CooccurrenceStats { window_size: 1, total_windows: total, windows: HashMap::from([(0, x), (1, y)]) }
    }

    #[test]
    fn npmi_examples() {
        // always together with p = 0.5: approaches 1 as the corpus grows
        let s = stats_from_probs(1_000_000, 500_000, 500_000, 500_000);
        assert!((npmi(0, 1, &s) - 1.0).abs() < 1e-5);
        // independent: P(ab) = P(a)P(b)
        let s = stats_from_probs(1_000_000, 500_000, 500_000, 250_000);
        assert!(npmi(0, 1, &s).abs() < 1e-5);
        // P(a)=P(b)=0.5, P(ab)=0.1
        let s = stats_from_probs(1_000_000, 500_000, 500_000, 100_000);
        let expected = (0.4f64).ln() / -(0.1f64).ln();
        assert!((npmi(0, 1, &s) - expected).abs() < 1e-5);
        assert!((npmi(0, 1, &s) + 0.3979).abs() < 1e-4);
    }

    #[test]
    fn npmi_coherence_aggregation() {
        let c = corpus(&["a b", "a b", "c d", "c d"]);
        let s = CooccurrenceStats::count(&c, 2).unwrap();
        let t = topic_over(&c, &["a", "b"]);
        assert_eq!(coherence_npmi(&t, &s, 10), Some(npmi(id(&c, "a"), id(&c, "b"), &s)));
        let t = topic_over(&c, &["a", "b", "c"]);
        let (a, b, cc) = (id(&c, "a"), id(&c, "b"), id(&c, "c"));
        let mean = (npmi(a, b, &s) + npmi(a, cc, &s) + npmi(b, cc, &s)) / 3.0;
        assert!((coherence_npmi(&t, &s, 10).unwrap() - mean).abs() < 1e-15);
        let single = topic_over(&c, &["a"]);
        assert_eq!(coherence_npmi(&single, &s, 10), None);
    }

    #[test]
    fn confirmation_examples() {
        // W' present exactly in the windows that contain S
        let c = corpus(&["a b", "a b", "c d"]);
        let s = CooccurrenceStats::count(&c, 2).unwrap();
        assert_eq!(confirmation(id(&c, "a"), &[id(&c, "b")], &s), 1.0);

        // P(w|S) = 0.8, P(w|~S) = 0.3
        let mut docs = Vec::new();
        docs.extend(std::iter::repeat_n("w s", 8));
        docs.extend(std::iter::repeat_n("s", 2));
        docs.extend(std::iter::repeat_n("w", 3));
        docs.extend(std::iter::repeat_n("x", 7));
        let c = corpus(&docs);
        let s = CooccurrenceStats::count(&c, 5).unwrap();
        assert!((confirmation(id(&c, "w"), &[id(&c, "s")], &s) - 0.5).abs() < 1e-12);

        // independent: P(w|S) = P(w|~S)
        let mut docs = Vec::new();
        docs.extend(std::iter::repeat_n("w s", 2));
        docs.extend(std::iter::repeat_n("s", 2));
        docs.extend(std::iter::repeat_n("w", 2));
        docs.extend(std::iter::repeat_n("x", 2));
        let c = corpus(&docs);
        let s = CooccurrenceStats::count(&c, 5).unwrap();
        assert_eq!(confirmation(id(&c, "w"), &[id(&c, "s")], &s), 0.0);
    }

    #[test]
    fn cv_examples() {
        // "a" and "b" have identical NPMI profiles against {a, b}
        let c = corpus(&["a b", "a b", "c"]);
        let s = CooccurrenceStats::count(&c, 2).unwrap();
        let t = topic_over(&c, &["a", "b"]);
        let v = coherence_cv(&t, &s, 2).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        // three-document toy corpus, top_n = 2: hand-evaluated 2-d vectors
        let c = corpus(&["a b", "a c", "b c"]);
        let s = CooccurrenceStats::count(&c, 2).unwrap();
        let (a, b) = (id(&c, "a"), id(&c, "b"));
        let n = npmi(a, b, &s);
        // windows: 3, P(a)=P(b)=2/3, P(ab)=1/3, eps = 1/3
        let expected_n = ((2.0 / 3.0) / (4.0 / 9.0f64)).ln() / -(2.0f64 / 3.0).ln();
        assert!((n - expected_n).abs() < 1e-12);
        let va = [1.0, n];
        let vb = [n, 1.0];
        let cos = (va[0] * vb[0] + va[1] * vb[1]) / (1.0 + n * n);
        let t = topic_over(&c, &["a", "b"]);
        assert!((coherence_cv(&t, &s, 2).unwrap() - cos).abs() < 1e-12);
    }

    #[test]
    fn cv_orthogonal_profiles() {
        let s = stats_from_probs(100, 50, 50, 0);
        // hand-built vectors (1, 0) and (0, 1)
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert!(cv_of_words(&[0, 1], &s).is_some());
    }

    #[test]
    fn scores_ignore_weight_scale() {
        let c = corpus(&["a b c a", "b c d", "a d d c", "b b a"]);
        let t = topic_over(&c, &["a", "b", "c", "d"]);
        let scaled = Topic::new(t.word_weights().scaled(7.5), t.doc_weights().clone()).unwrap();
        let ev = CoherenceEvaluator::new(&c, &[&t], 10, [2, 3, 4]).unwrap();
        assert_eq!(ev.score(&t), ev.score(&scaled));
    }

    #[test]
    fn npmi_stays_in_range() {
        let c = corpus(&["a b c d e", "a a b", "c d", "e e e a", "b d"]);
        for w in 1..6 {
            let s = CooccurrenceStats::count(&c, w).unwrap();
            for a in 0..c.vocab_size() as u32 {
                for b in 0..c.vocab_size() as u32 {
                    let v = npmi(a, b, &s);
                    assert!((-1.0..=1.0).contains(&v));
                }
            }
        }
    }
}
