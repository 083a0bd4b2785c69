//! Generators for corpora with known topical structure and for perturbed
//! topic models, used by tests and benchmarks.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::corpus::{Corpus, Dictionary};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::topics::{ModelType, ReferenceTopicSet, Topic, TopicModel};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_topics: usize,
    /// Each topic owns a disjoint block of this many words.
    pub words_per_topic: usize,
    pub num_docs: usize,
    pub doc_len: (usize, usize),
    /// Symmetric Dirichlet concentration of document mixtures.
    pub doc_alpha: f64,
    /// Symmetric Dirichlet concentration of word weights inside a block.
    pub word_alpha: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_topics: 5,
            words_per_topic: 20,
            num_docs: 500,
            doc_len: (60, 140),
            doc_alpha: 0.3,
            word_alpha: 1.0,
            seed: 0,
        }
    }
}

/// Symmetric Dirichlet draw via normalized Gamma variates.
pub fn dirichlet(rng: &mut ChaCha8Rng, dim: usize, concentration: f64) -> Result<Vec<f64>> {
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| Error::arg(format!("Dirichlet concentration: {e}")))?;
    loop {
        let draws: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return Ok(draws.into_iter().map(|g| g / total).collect());
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Generating word distributions, one dense row per topic.
    pub topics: Vec<Vec<f64>>,
    /// `theta[d][k]`: true proportion of topic `k` in document `d`.
    pub theta: Vec<Vec<f64>>,
}

impl SyntheticCorpus {
    pub fn generate(spec: &SyntheticSpec) -> Result<Self> {
        let (k, w) = (spec.num_topics, spec.words_per_topic);
        if k == 0 || w == 0 || spec.num_docs == 0 || spec.doc_len.0 == 0 || spec.doc_len.0 > spec.doc_len.1 {
            return Err(Error::arg("synthetic corpus needs topics, words, documents and a valid length range"));
        }
        let v = k * w;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut topics = Vec::with_capacity(k);
        for t in 0..k {
            let block = dirichlet(&mut rng, w, spec.word_alpha)?;
            let mut row = vec![0.0; v];
            row[t * w..(t + 1) * w].copy_from_slice(&block);
            topics.push(row);
        }
        let word_samplers: Vec<WeightedIndex<f64>> = topics
            .iter()
            .map(|row| WeightedIndex::new(&row[..]).map_err(|e| Error::arg(e.to_string())))
            .collect::<Result<_>>()?;

        let mut theta = Vec::with_capacity(spec.num_docs);
        let mut docs = Vec::with_capacity(spec.num_docs);
        for _ in 0..spec.num_docs {
            let mix = dirichlet(&mut rng, k, spec.doc_alpha)?;
            let topic_sampler = WeightedIndex::new(&mix).map_err(|e| Error::arg(e.to_string()))?;
            let len = rng.random_range(spec.doc_len.0..=spec.doc_len.1);
            let tokens: Vec<u32> =
                (0..len).map(|_| word_samplers[topic_sampler.sample(&mut rng)].sample(&mut rng) as u32).collect();
            theta.push(mix);
            docs.push(tokens);
        }
        let words = (0..v).map(|i| format!("t{}w{}", i / w, i % w)).collect();
        let corpus = Corpus::from_token_ids(Dictionary::from_words(words)?, docs)?;
        Ok(Self { corpus, topics, theta })
    }

    /// Generator topics with their true document proportions.
    pub fn generator_topics(&self) -> Result<Vec<Topic>> {
        (0..self.topics.len())
            .map(|k| {
                let docs: Vec<f64> = self.theta.iter().map(|row| row[k]).collect();
                Topic::new(SparseVector::from_dense(&self.topics[k]), SparseVector::from_dense(&docs))
                    .map(|t| t.with_label(format!("generator {k}")))
            })
            .collect()
    }

    pub fn reference_set(&self) -> Result<ReferenceTopicSet> {
        Ok(ReferenceTopicSet::new(self.generator_topics()?))
    }

    /// `theta` column of topic `k`.
    pub fn proportions(&self, k: usize) -> Vec<f64> {
        self.theta.iter().map(|row| row[k]).collect()
    }
}

/// A model whose topics are the base topics mixed with random noise:
/// `(1 - noise) * base + noise * dirichlet`, in shuffled order. Extra topics
/// beyond `base.len()` are pure noise.
pub fn perturbed_model(base: &[Topic], num_topics: usize, noise: f64, seed: u64) -> Result<TopicModel> {
    let first = base.first().ok_or_else(|| Error::arg("no base topics"))?;
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::arg(format!("noise {noise} outside [0, 1]")));
    }
    let (v, n) = (first.word_weights().dim(), first.doc_weights().dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..num_topics).collect();
    rand::seq::SliceRandom::shuffle(&mut order[..], &mut rng);
    let topics = order
        .into_iter()
        .map(|i| {
            let random = SparseVector::from_dense(&dirichlet(&mut rng, v, 0.1)?);
            let words = match base.get(i) {
                Some(t) => {
                    let sum = t.word_weights().sum();
                    t.word_weights().linear_combination(1.0 - noise, &random, noise * sum)?
                }
                None => random,
            };
            let docs = base.get(i).map_or_else(|| SparseVector::from_dense(&vec![1.0 / n as f64; n]), |t| t.doc_weights().clone());
            Topic::new(words, docs)
        })
        .collect::<Result<Vec<_>>>()?;
    TopicModel::new(topics, ModelType::External, seed)
}

/// `t` random topics over `v` words, each with `nnz` non-zero word weights.
pub fn random_sparse_topics(t: usize, v: usize, nnz: usize, seed: u64) -> Result<Vec<Topic>> {
    if nnz == 0 || nnz > v {
        return Err(Error::arg(format!("cannot place {nnz} weights among {v} words")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..t)
        .map(|_| {
            let mut ids = rand::seq::index::sample(&mut rng, v, nnz).into_vec();
            ids.sort_unstable();
            let pairs: Vec<(u32, f64)> = ids.into_iter().map(|i| (i as u32, rng.random::<f64>() + 1e-3)).collect();
            Topic::new(SparseVector::from_pairs(v, pairs)?, SparseVector::from_dense(&[1.0]))
        })
        .collect()
}
