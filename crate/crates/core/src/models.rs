//! Topic model trainers: collapsed-Gibbs LDA, LDA with fixed topics for
//! size estimation, and projected-gradient NMF with NNDSVD initialization.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{Corpus, TfIdf};
use crate::distance::normalize_to_distribution;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::topics::{ModelType, ReferenceTopicSet, Topic, TopicModel};

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior; `None` means `50 / T`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub warmup: usize,
    pub iters: usize,
    pub seed: u64,
}

impl LdaConfig {
    pub fn new(num_topics: usize, seed: u64) -> Self {
        Self { num_topics, alpha: None, beta: 0.01, warmup: 50, iters: 800, seed }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.num_topics as f64)
    }
}

/// Draws an index with probability proportional to `weights` (prefix sums).
fn draw(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let total = cumulative[cumulative.len() - 1];
    let u = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

/// Collapsed Gibbs sampler state. Word-topic counts are kept only for the
/// learnable topics, which occupy the indices `fixed..T`.
struct Gibbs<'a> {
    corpus: &'a Corpus,
    topics: usize,
    fixed: usize,
    beta: f64,
    z: Vec<Vec<u32>>,
    n_dk: Vec<Vec<u32>>,
    n_wk: Vec<u32>,
    n_k: Vec<u32>,
}

impl<'a> Gibbs<'a> {
    fn learnable(&self) -> usize {
        self.topics - self.fixed
    }

    fn init(corpus: &'a Corpus, topics: usize, fixed: usize, beta: f64, rng: &mut ChaCha8Rng) -> Self {
        let learn = topics - fixed;
        let mut g = Self {
            corpus,
            topics,
            fixed,
            beta,
            z: Vec::with_capacity(corpus.num_docs()),
            n_dk: vec![vec![0; topics]; corpus.num_docs()],
            n_wk: vec![0; corpus.vocab_size() * learn],
            n_k: vec![0; learn],
        };
        for (d, doc) in corpus.documents.iter().enumerate() {
            let zs: Vec<u32> = doc.tokens.iter().map(|_| rng.random_range(0..topics as u32)).collect();
            for (&w, &k) in doc.tokens.iter().zip(&zs) {
                g.add(d, w, k as usize);
            }
            g.z.push(zs);
        }
        g
    }

    fn add(&mut self, d: usize, w: u32, k: usize) {
        self.n_dk[d][k] += 1;
        if k >= self.fixed {
            let j = k - self.fixed;
            let learn = self.learnable();
            self.n_wk[w as usize * learn + j] += 1;
            self.n_k[j] += 1;
        }
    }

    fn remove(&mut self, d: usize, w: u32, k: usize) {
        self.n_dk[d][k] -= 1;
        if k >= self.fixed {
            let j = k - self.fixed;
            let learn = self.learnable();
            self.n_wk[w as usize * learn + j] -= 1;
            self.n_k[j] -= 1;
        }
    }

    /// One sweep over all tokens. `doc_prior(d, k)` is the document-topic
    /// pseudo-count and `fixed_phi(k, w)` the word probability of fixed topic `k`.
    fn sweep(
        &mut self,
        rng: &mut ChaCha8Rng,
        doc_prior: &dyn Fn(usize, usize) -> f64,
        fixed_phi: &dyn Fn(usize, u32) -> f64,
    ) {
        let v_beta = self.corpus.vocab_size() as f64 * self.beta;
        let learn = self.learnable();
        let mut cumulative = vec![0.0; self.topics];
        for d in 0..self.corpus.num_docs() {
            for i in 0..self.z[d].len() {
                let w = self.corpus.documents[d].tokens[i];
                let old = self.z[d][i] as usize;
                self.remove(d, w, old);
                let mut acc = 0.0;
                for k in 0..self.topics {
                    let doc_part = self.n_dk[d][k] as f64 + doc_prior(d, k);
                    let word_part = if k < self.fixed {
                        fixed_phi(k, w)
                    } else {
                        let j = k - self.fixed;
                        (self.n_wk[w as usize * learn + j] as f64 + self.beta) / (self.n_k[j] as f64 + v_beta)
                    };
                    acc += doc_part * word_part;
                    cumulative[k] = acc;
                }
                let new = if acc > 0.0 {
                    draw(rng, &cumulative)
                } else {
                    // no topic can emit the word: sample from the document prior alone
                    let mut acc = 0.0;
                    for (k, c) in cumulative.iter_mut().enumerate() {
                        acc += self.n_dk[d][k] as f64 + doc_prior(d, k);
                        *c = acc;
                    }
                    draw(rng, &cumulative)
                };
                self.add(d, w, new);
                self.z[d][i] = new as u32;
            }
        }
        debug_assert!(self.consistent());
    }

    fn consistent(&self) -> bool {
        let learn = self.learnable();
        let mut n_dk = vec![vec![0u32; self.topics]; self.z.len()];
        let mut n_wk = vec![0u32; self.n_wk.len()];
        for (d, zs) in self.z.iter().enumerate() {
            for (&k, &w) in zs.iter().zip(&self.corpus.documents[d].tokens) {
                n_dk[d][k as usize] += 1;
                if k as usize >= self.fixed {
                    n_wk[w as usize * learn + k as usize - self.fixed] += 1;
                }
            }
        }
        let n_k_ok = (0..learn).all(|j| {
            (0..self.corpus.vocab_size()).map(|w| self.n_wk[w * learn + j]).sum::<u32>() == self.n_k[j]
        });
        n_dk == self.n_dk && n_wk == self.n_wk && n_k_ok
    }

    /// Smoothed word distribution of learnable topic `j`.
    fn learned_phi(&self, j: usize) -> Vec<f64> {
        let learn = self.learnable();
        let v = self.corpus.vocab_size();
        let denom = self.n_k[j] as f64 + v as f64 * self.beta;
        (0..v).map(|w| (self.n_wk[w * learn + j] as f64 + self.beta) / denom).collect()
    }

    /// Per-document topic proportions `(n_dk + prior) / (len + sum prior)`.
    fn theta(&self, doc_prior: &dyn Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
        (0..self.corpus.num_docs())
            .map(|d| {
                let priors: Vec<f64> = (0..self.topics).map(|k| doc_prior(d, k)).collect();
                let denom = self.z[d].len() as f64 + priors.iter().sum::<f64>();
                (0..self.topics).map(|k| (self.n_dk[d][k] as f64 + priors[k]) / denom).collect()
            })
            .collect()
    }
}

fn check_corpus(corpus: &Corpus, topics: usize) -> Result<()> {
    if topics == 0 {
        return Err(Error::arg("number of topics must be at least 1"));
    }
    if corpus.num_docs() == 0 || corpus.vocab_size() == 0 {
        return Err(Error::arg("cannot train on an empty corpus"));
    }
    if topics > corpus.total_tokens() {
        log::warn!("{topics} topics exceed the {} corpus tokens; the model will be degenerate", corpus.total_tokens());
    }
    Ok(())
}

fn learned_topics(g: &Gibbs<'_>, theta: &[Vec<f64>]) -> Result<Vec<Topic>> {
    (g.fixed..g.topics)
        .map(|k| {
            let words = SparseVector::from_dense(&g.learned_phi(k - g.fixed));
            let docs: Vec<f64> = theta.iter().map(|row| row[k]).collect();
            Topic::new(words, SparseVector::from_dense(&docs))
        })
        .collect()
}

/// Trains LDA by collapsed Gibbs sampling and returns the final-state
/// estimates of the topic-word and document-topic distributions.
pub fn train_lda(corpus: &Corpus, config: &LdaConfig) -> Result<TopicModel> {
    let t = config.num_topics;
    check_corpus(corpus, t)?;
    let alpha = config.alpha();
    if !(alpha > 0.0 && config.beta > 0.0) {
        return Err(Error::arg("LDA priors must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = Gibbs::init(corpus, t, 0, config.beta, &mut rng);
    let prior = |_: usize, _: usize| alpha;
    for _ in 0..config.warmup + config.iters {
        g.sweep(&mut rng, &prior, &|_, _| 0.0);
    }
    let topics = learned_topics(&g, &g.theta(&prior))?;
    TopicModel::new(topics, ModelType::Lda, config.seed)
}

/// Trains one LDA model per seed, in parallel.
pub fn train_lda_seeds(corpus: &Corpus, config: &LdaConfig, seeds: &[u64]) -> Result<Vec<TopicModel>> {
    crate::par::try_map_range(seeds.len(), |i| train_lda(corpus, &LdaConfig { seed: seeds[i], ..config.clone() }))
}

/// Fixed topics for size estimation.
#[derive(Debug, Clone)]
pub struct FixedTopicSpec {
    /// Word distributions (each sums to 1), one per fixed topic.
    pub phi: Vec<Vec<f64>>,
    /// `theta_prior[d][k]`: document prior weight of fixed topic `k`; may be
    /// empty for no document information.
    pub theta_prior: Vec<Vec<f64>>,
    pub eta: f64,
}

impl FixedTopicSpec {
    /// Word and document weights of the reference topics, each normalized to
    /// a probability distribution.
    pub fn from_reference(refset: &ReferenceTopicSet, eta: f64) -> Result<Self> {
        let phi = refset
            .topics
            .iter()
            .map(|t| Ok(normalize_to_distribution(t.word_weights())?.as_sparse().to_dense()))
            .collect::<Result<Vec<_>>>()?;
        let n = refset.topics.first().map_or(0, |t| t.doc_weights().dim());
        let mut theta_prior = vec![vec![0.0; refset.len()]; n];
        for (k, t) in refset.topics.iter().enumerate() {
            let total = t.doc_weights().sum();
            if total > 0.0 {
                for (d, w) in t.doc_weights().iter() {
                    theta_prior[d as usize][k] = w / total;
                }
            }
        }
        Ok(Self { phi, theta_prior, eta })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedLdaConfig {
    pub extra_topics: usize,
    pub beta: f64,
    pub iters: usize,
    pub seed: u64,
}

impl Default for FixedLdaConfig {
    fn default() -> Self {
        Self { extra_topics: 20, beta: 0.01, iters: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct FixedLdaFit {
    /// `theta[d][k]`: estimated proportion of fixed topic `k` in document `d`.
    pub theta: Vec<Vec<f64>>,
    pub extra: Vec<Topic>,
}

/// LDA with some topics' word distributions held fixed. The fixed topics
/// enter the document side with an additive prior `eta * theta_prior`;
/// `alpha = 1 / T` where `T` counts fixed and learnable topics.
pub fn train_fixed_lda(corpus: &Corpus, fixed: &FixedTopicSpec, config: &FixedLdaConfig) -> Result<FixedLdaFit> {
    let k_fixed = fixed.phi.len();
    let t = k_fixed + config.extra_topics;
    check_corpus(corpus, t)?;
    let v = corpus.vocab_size();
    for (k, row) in fixed.phi.iter().enumerate() {
        if row.len() != v {
            return Err(Error::arg(format!("fixed topic {k} has {} words, corpus has {v}", row.len())));
        }
        let sum: f64 = row.iter().sum();
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::arg(format!("fixed topic {k} is not a probability distribution (sum {sum})")));
        }
    }
    let has_prior = !fixed.theta_prior.is_empty();
    if has_prior
        && (fixed.theta_prior.len() != corpus.num_docs() || fixed.theta_prior.iter().any(|r| r.len() != k_fixed))
    {
        return Err(Error::arg("document prior must be a documents x fixed-topics table"));
    }
    if !(fixed.eta >= 0.0 && config.beta > 0.0) {
        return Err(Error::arg("priors must be non-negative"));
    }
    let alpha = 1.0 / t as f64;
    let prior = |d: usize, k: usize| -> f64 {
        if k < k_fixed && has_prior {
            alpha + fixed.eta * fixed.theta_prior[d][k]
        } else {
            alpha
        }
    };
    let phi = |k: usize, w: u32| fixed.phi[k][w as usize];

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = Gibbs::init(corpus, t, k_fixed, config.beta, &mut rng);
    for _ in 0..config.iters {
        g.sweep(&mut rng, &prior, &phi);
    }
    let theta = g.theta(&prior);
    let extra = learned_topics(&g, &theta)?;
    Ok(FixedLdaFit { theta: theta.into_iter().map(|mut r| { r.truncate(k_fixed); r }).collect(), extra })
}

pub const SIZE_THRESHOLD: f64 = 0.10;

/// Number of documents in which each topic has proportion at least `threshold`.
pub fn topic_sizes(theta: &[Vec<f64>], threshold: f64) -> Vec<usize> {
    let k = theta.first().map_or(0, Vec::len);
    (0..k).map(|j| theta.iter().filter(|row| row[j] >= threshold).count()).collect()
}

const NNDSVD_FILL: f64 = 1e-6;
const OVERSAMPLING: usize = 10;
const POWER_ITERATIONS: usize = 2;

/// Leading `rank` singular triplets `(U, s, V^T)`, exact for small problems
/// and by randomized subspace iteration otherwise.
fn truncated_svd(a: &DMatrix<f64>, rank: usize, seed: u64) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (n, v) = a.shape();
    let sketch = rank + OVERSAMPLING;
    let (u, s, vt) = if sketch >= n.min(v) {
        let svd = a.clone().svd(true, true);
        (svd.u.unwrap(), svd.singular_values.as_slice().to_vec(), svd.v_t.unwrap())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = DMatrix::<f64>::from_fn(v, sketch, |_, _| rng.sample(StandardNormal));
        let mut q = (a * omega).qr().q();
        for _ in 0..POWER_ITERATIONS {
            let z = (a.transpose() * &q).qr().q();
            q = (a * z).qr().q();
        }
        let b = q.transpose() * a;
        let svd = b.svd(true, true);
        (q * svd.u.unwrap(), svd.singular_values.as_slice().to_vec(), svd.v_t.unwrap())
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    order.truncate(rank);
    let u = DMatrix::from_fn(n, rank, |r, c| u[(r, order[c])]);
    let vt = DMatrix::from_fn(rank, v, |r, c| vt[(order[r], c)]);
    Ok((u, order.iter().map(|&i| s[i]).collect(), vt))
}

/// Non-negative double SVD initialization (plain variant: zeros stay zero).
/// Components with negligible singular value are filled with `1e-6`.
pub fn nndsvd_init(a: &DMatrix<f64>, rank: usize, seed: u64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, v) = a.shape();
    if rank == 0 || rank > n.min(v) {
        return Err(Error::arg(format!("NNDSVD rank {rank} outside 1..={}", n.min(v))));
    }
    if a.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::arg("NNDSVD input must be finite and non-negative"));
    }
    let (u, s, vt) = truncated_svd(a, rank, seed)?;
    let mut w = DMatrix::zeros(n, rank);
    let mut h = DMatrix::zeros(rank, v);
    let negligible = s.first().copied().unwrap_or(0.0) * 1e-12;
    for j in 0..rank {
        if s[j] <= negligible || s[j] == 0.0 {
            w.column_mut(j).fill(NNDSVD_FILL);
            h.row_mut(j).fill(NNDSVD_FILL);
            continue;
        }
        let x: Vec<f64> = u.column(j).iter().copied().collect();
        let y: Vec<f64> = vt.row(j).iter().copied().collect();
        let (xp, xn) = split_signs(&x);
        let (yp, yn) = split_signs(&y);
        let (nxp, nxn, nyp, nyn) = (norm(&xp), norm(&xn), norm(&yp), norm(&yn));
        let (mp, mn) = (nxp * nyp, nxn * nyn);
        let (uu, vv, sigma, nu, nv) = if mp >= mn { (xp, yp, mp, nxp, nyp) } else { (xn, yn, mn, nxn, nyn) };
        if sigma == 0.0 {
            w.column_mut(j).fill(NNDSVD_FILL);
            h.row_mut(j).fill(NNDSVD_FILL);
            continue;
        }
        let scale = (s[j] * sigma).sqrt();
        for r in 0..n {
            w[(r, j)] = scale * uu[r] / nu;
        }
        for c in 0..v {
            h[(j, c)] = scale * vv[c] / nv;
        }
    }
    Ok((w, h))
}

fn split_signs(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (x.iter().map(|v| v.max(0.0)).collect(), x.iter().map(|v| (-v).max(0.0)).collect())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfConfig {
    pub num_topics: usize,
    pub max_iters: usize,
    /// Stop when the relative objective decrease falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl NmfConfig {
    pub fn new(num_topics: usize, seed: u64) -> Self {
        Self { num_topics, max_iters: 200, tol: 1e-5, seed }
    }
}

#[derive(Debug, Clone)]
pub struct NmfFactors {
    /// Documents x topics.
    pub w: DMatrix<f64>,
    /// Topics x words.
    pub h: DMatrix<f64>,
    /// `||A - WH||_F^2` at the start and after every iteration.
    pub objective_trace: Vec<f64>,
}

pub fn frobenius_loss(a: &DMatrix<f64>, w: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    (a - w * h).norm_squared()
}

const SUBPROBLEM_STEPS: usize = 10;
const ARMIJO_SIGMA: f64 = 0.01;
const STEP_FACTOR: f64 = 0.1;

/// A few projected-gradient steps on `min_{X>=0} 0.5 ||B - M X||^2`, given
/// `mtm = M^T M` and `mtb = M^T B`. Each accepted step satisfies the Armijo
/// condition on the exact quadratic, so the objective never increases.
fn nls_subproblem(mtm: &DMatrix<f64>, mtb: &DMatrix<f64>, x: &mut DMatrix<f64>) {
    let mut step = 1.0;
    for _ in 0..SUBPROBLEM_STEPS {
        let grad = mtm * &*x - mtb;
        let proj: f64 = grad.iter().zip(x.iter()).filter(|(g, v)| **g < 0.0 || **v > 0.0).map(|(g, _)| g * g).sum();
        if proj == 0.0 {
            return;
        }
        let mut accepted: Option<DMatrix<f64>> = None;
        let mut shrinking = None;
        for _ in 0..20 {
            let candidate = (&*x - &grad * step).map(|v| v.max(0.0));
            let d = &candidate - &*x;
            let decrease = grad.dot(&d);
            let curvature = (mtm * &d).dot(&d);
            let sufficient = (1.0 - ARMIJO_SIGMA) * decrease + 0.5 * curvature <= 0.0 && decrease < 0.0;
            let shrink = *shrinking.get_or_insert(!sufficient);
            if shrink {
                if sufficient {
                    accepted = Some(candidate);
                    break;
                }
                step *= STEP_FACTOR;
            } else {
                if !sufficient || accepted.as_ref() == Some(&candidate) {
                    break;
                }
                accepted = Some(candidate);
                step /= STEP_FACTOR;
            }
        }
        match accepted {
            Some(next) => *x = next,
            None => return,
        }
    }
}

/// Alternating projected-gradient NMF from the given starting factors.
pub fn fit_nmf_from(
    a: &DMatrix<f64>,
    mut w: DMatrix<f64>,
    mut h: DMatrix<f64>,
    max_iters: usize,
    tol: f64,
) -> Result<NmfFactors> {
    if w.nrows() != a.nrows() || h.ncols() != a.ncols() || w.ncols() != h.nrows() {
        return Err(Error::arg("factor shapes do not match the matrix"));
    }
    if w.iter().chain(h.iter()).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::arg("starting factors must be finite and non-negative"));
    }
    let mut loss = frobenius_loss(a, &w, &h);
    let mut trace = vec![loss];
    for it in 1..=max_iters {
        let (prev_w, prev_h) = (w.clone(), h.clone());
        // update W with H fixed: rows of A ~ rows of W times H
        let mut wt = w.transpose();
        nls_subproblem(&(&h * h.transpose()), &(&h * a.transpose()), &mut wt);
        w = wt.transpose();
        nls_subproblem(&(w.transpose() * &w), &(w.transpose() * a), &mut h);

        let next = frobenius_loss(a, &w, &h);
        if !next.is_finite() {
            return Err(Error::Numerical { iteration: it, msg: "non-finite NMF objective".into() });
        }
        if next > loss {
            // rounding noise at convergence; keep the previous factors
            w = prev_w;
            h = prev_h;
            break;
        }
        trace.push(next);
        let relative = if loss > 0.0 { (loss - next) / loss } else { 0.0 };
        loss = next;
        if relative < tol {
            break;
        }
    }
    Ok(NmfFactors { w, h, objective_trace: trace })
}

/// NNDSVD-initialized NMF of a non-negative documents x words matrix.
pub fn fit_nmf(a: &DMatrix<f64>, config: &NmfConfig) -> Result<NmfFactors> {
    let (w, h) = nndsvd_init(a, config.num_topics, config.seed)?;
    fit_nmf_from(a, w, h, config.max_iters, config.tol)
}

impl NmfFactors {
    /// Topic `k` takes row `k` of H as word weights and column `k` of W as
    /// document weights. A topic whose word row vanished gets a uniform fill
    /// so it stays comparable by cosine distance.
    pub fn into_model(self, seed: u64) -> Result<TopicModel> {
        let topics = (0..self.h.nrows())
            .map(|k| {
                let mut words: Vec<f64> = self.h.row(k).iter().copied().collect();
                if words.iter().all(|&x| x == 0.0) {
                    words.fill(NNDSVD_FILL);
                }
                let docs: Vec<f64> = self.w.column(k).iter().copied().collect();
                Topic::new(SparseVector::from_dense(&words), SparseVector::from_dense(&docs))
            })
            .collect::<Result<Vec<_>>>()?;
        TopicModel::new(topics, ModelType::Nmf, seed)
    }
}

/// NMF of the TF-IDF matrix, returned as a topic model.
pub fn train_nmf(tfidf: &TfIdf, config: &NmfConfig) -> Result<TopicModel> {
    fit_nmf(&tfidf.to_dense(), config)?.into_model(config.seed)
}

pub fn train_nmf_seeds(tfidf: &TfIdf, config: &NmfConfig, seeds: &[u64]) -> Result<Vec<TopicModel>> {
    let a = tfidf.to_dense();
    crate::par::try_map_range(seeds.len(), |i| {
        let cfg = NmfConfig { seed: seeds[i], ..config.clone() };
        fit_nmf(&a, &cfg)?.into_model(cfg.seed)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PreprocessConfig;
    use crate::distance::cosine_similarity;

    fn toy_corpus() -> Corpus {
        let mut texts = Vec::new();
        for i in 0..40 {
            texts.push(if i % 2 == 0 { "a b a b b a a b" } else { "c d c d d c c d" });
        }
        let cfg = PreprocessConfig { min_freq: 1, max_doc_frac: 1.0, min_token_len: 1, ..Default::default() };
        Corpus::from_texts(&texts, &cfg).unwrap()
    }

    #[test]
    fn lda_separates_disjoint_vocabularies() {
        let c = toy_corpus();
        let cfg = LdaConfig { alpha: Some(0.1), warmup: 0, iters: 200, ..LdaConfig::new(2, 5) };
        let m = train_lda(&c, &cfg).unwrap();
        let halves = [["a", "b"], ["c", "d"]];
        for t in &m.topics {
            let best = halves
                .iter()
                .map(|h| h.iter().map(|w| t.word_weights().get(c.dictionary.id(w).unwrap())).sum::<f64>())
                .fold(0.0, f64::max);
            assert!(best > 0.9, "{best}");
        }
        for t in &m.topics {
            assert!((t.word_weights().sum() - 1.0).abs() < 1e-9);
        }
        for d in 0..c.num_docs() as u32 {
            let s: f64 = m.topics.iter().map(|t| t.doc_weights().get(d)).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_topic_is_smoothed_unigram() {
        let c = toy_corpus();
        let m = train_lda(&c, &LdaConfig { warmup: 0, iters: 3, ..LdaConfig::new(1, 0) }).unwrap();
        let total = c.total_tokens() as f64;
        let v = c.vocab_size() as f64;
        for w in 0..c.vocab_size() as u32 {
            let count: u32 = c.documents.iter().map(|d| d.count(w)).sum();
            let expected = (count as f64 + 0.01) / (total + v * 0.01);
            assert!((m.topics[0].word_weights().get(w) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn lda_is_deterministic() {
        let c = toy_corpus();
        let cfg = LdaConfig { warmup: 2, iters: 10, ..LdaConfig::new(3, 11) };
        assert_eq!(train_lda(&c, &cfg).unwrap(), train_lda(&c, &cfg).unwrap());
        let seeds = train_lda_seeds(&c, &cfg, &[11, 12]).unwrap();
        assert_eq!(seeds[0], train_lda(&c, &cfg).unwrap());
        assert_eq!(seeds[1].seed, 12);
    }

    #[test]
    fn fixed_single_unigram_topic() {
        let c = toy_corpus();
        let total = c.total_tokens() as f64;
        let phi: Vec<f64> = (0..c.vocab_size() as u32)
            .map(|w| c.documents.iter().map(|d| d.count(w)).sum::<u32>() as f64 / total)
            .collect();
        let spec = FixedTopicSpec { phi: vec![phi], theta_prior: vec![], eta: 1.0 };
        let cfg = FixedLdaConfig { extra_topics: 0, iters: 5, ..Default::default() };
        let fit = train_fixed_lda(&c, &spec, &cfg).unwrap();
        assert!(fit.theta.iter().all(|r| r == &vec![1.0]));
        assert!(fit.extra.is_empty());
    }

    #[test]
    fn fixed_topic_excluded_by_zero_likelihood() {
        let c = toy_corpus();
        let (a, b) = (c.dictionary.id("a").unwrap(), c.dictionary.id("b").unwrap());
        let mut phi = vec![0.0; c.vocab_size()];
        phi[a as usize] = 0.5;
        phi[b as usize] = 0.5;
        let spec = FixedTopicSpec { phi: vec![phi], theta_prior: vec![], eta: 1.0 };
        let cfg = FixedLdaConfig { extra_topics: 2, iters: 20, ..Default::default() };
        let fit = train_fixed_lda(&c, &spec, &cfg).unwrap();
        let alpha = 1.0 / 3.0;
        for (d, doc) in c.documents.iter().enumerate() {
            if doc.count(a) == 0 && doc.count(b) == 0 {
                assert!(fit.theta[d][0] <= alpha / (doc.len() as f64 + 3.0 * alpha) + 1e-15);
            }
        }
        let bad = FixedTopicSpec { phi: vec![vec![0.3; c.vocab_size()]], theta_prior: vec![], eta: 1.0 };
        assert!(train_fixed_lda(&c, &bad, &cfg).is_err());
    }

    #[test]
    fn size_counting() {
        assert_eq!(topic_sizes(&[vec![0.10]], SIZE_THRESHOLD), vec![1]);
        assert_eq!(topic_sizes(&[vec![0.0, 0.0], vec![0.0, 0.0]], SIZE_THRESHOLD), vec![0, 0]);
        assert_eq!(topic_sizes(&[vec![0.05], vec![0.15], vec![0.5]], SIZE_THRESHOLD), vec![2]);
    }

    fn rel_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / a.norm()
    }

    #[test]
    fn nndsvd_rank_one_and_identity() {
        let u = DMatrix::from_fn(30, 1, |r, _| 1.0 + r as f64 * 0.1);
        let v = DMatrix::from_fn(1, 40, |_, c| 0.5 + (c % 7) as f64);
        let a = &u * &v;
        let (w, h) = nndsvd_init(&a, 1, 3).unwrap();
        assert!(rel_error(&a, &(&w * &h)) < 1e-6);

        let id = DMatrix::<f64>::identity(2, 2);
        let (w, h) = nndsvd_init(&id, 2, 0).unwrap();
        assert!((&w * &h - &id).abs().max() < 1e-6);
        assert!(nndsvd_init(&id, 3, 0).is_err());
    }

    #[test]
    fn nndsvd_is_non_negative_and_fills_rank_deficit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = DMatrix::from_fn(25, 35, |_, _| rng.random::<f64>());
        let (w, h) = nndsvd_init(&a, 6, 2).unwrap();
        assert!(w.iter().chain(h.iter()).all(|&x| x >= 0.0));

        let low = DMatrix::from_fn(4, 5, |r, c| if r == 0 { c as f64 + 1.0 } else { 0.0 });
        let (w, h) = nndsvd_init(&low, 3, 0).unwrap();
        assert!(w.column(2).iter().all(|&x| x == NNDSVD_FILL));
        assert!(h.row(2).iter().all(|&x| x == NNDSVD_FILL));
    }

    #[test]
    fn nmf_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w0 = DMatrix::from_fn(12, 3, |_, _| rng.random::<f64>());
        let h0 = DMatrix::from_fn(3, 15, |_, _| rng.random::<f64>());
        let a = &w0 * &h0;
        let fit = fit_nmf_from(&a, w0, h0, 50, 0.0).unwrap();
        assert!(fit.objective_trace.iter().all(|&l| (l - fit.objective_trace[0]).abs() < 1e-9));
    }

    #[test]
    fn nmf_objective_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = DMatrix::from_fn(20, 30, |_, _| rng.random::<f64>());
        let fit = fit_nmf(&a, &NmfConfig { max_iters: 100, tol: 0.0, ..NmfConfig::new(5, 1) }).unwrap();
        assert!(fit.objective_trace.len() > 2);
        assert!(fit.objective_trace.windows(2).all(|p| p[1] <= p[0]));
        assert!(fit.w.iter().chain(fit.h.iter()).all(|&x| x >= 0.0));
    }

    #[test]
    fn nmf_recovers_blocks() {
        let mut a = DMatrix::zeros(10, 12);
        for r in 0..5 {
            for c in 0..6 {
                a[(r, c)] = (1.0 + r as f64) * (1.0 + c as f64 * 0.3);
                a[(r + 5, c + 6)] = (2.0 + r as f64 * 0.5) * (1.0 + (5 - c) as f64 * 0.2);
            }
        }
        let fit = fit_nmf(&a, &NmfConfig::new(2, 0)).unwrap();
        let rows: Vec<SparseVector> = (0..2).map(|k| SparseVector::from_dense(&fit.h.row(k).iter().copied().collect::<Vec<_>>())).collect();
        let truth = [a.row(0).iter().copied().collect::<Vec<_>>(), a.row(5).iter().copied().collect::<Vec<_>>()];
        for t in truth {
            let t = SparseVector::from_dense(&t);
            let best = rows.iter().map(|r| cosine_similarity(r, &t).unwrap()).fold(0.0, f64::max);
            assert!(best >= 0.99, "{best}");
        }
        let model = fit.into_model(0).unwrap();
        assert_eq!(model.num_topics(), 2);
    }
}
