//! Data-parallel hot paths on the default rayon pool against the same work on
//! a single-thread pool. `cargo bench --no-default-features` runs the plain
//! sequential loops instead; the "parallel" rows then measure those too.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::ThreadPool;
use topcov::analysis::{bootstrap_ci, BootstrapConfig, Statistic};
use topcov::coherence::{CoherenceEvaluator, DEFAULT_TOP_N, DEFAULT_WINDOW_CP, DEFAULT_WINDOW_CV, DEFAULT_WINDOW_NPMI};
use topcov::distance::cosine_distance_matrix;
use topcov::matcher::{default_grid, nested_crossvalidate};
use topcov::stability::{aucdc_model_similarity, instance_stability, model_similarity_bipartite};
use topcov::synthetic::{perturbed_model, random_sparse_topics, SyntheticCorpus, SyntheticSpec};
use topcov::{ModelType, Topic, TopicModel};

fn single_thread() -> ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()
}

/// Benchmarks `f` once on the global pool and once on one thread.
fn both<F: Fn() + Sync>(c: &mut Criterion, name: &str, f: F) {
    let one = single_thread();
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", rayon::current_num_threads()), |b| b.iter(&f));
    g.bench_function(BenchmarkId::new("sequential", 1), |b| b.iter(|| one.install(&f)));
    g.finish();
}

fn bootstrap(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..200).map(|_| normal.sample(&mut rng)).collect();
    let y: Vec<f64> = x.iter().map(|v| v + normal.sample(&mut rng)).collect();
    let cfg = BootstrapConfig { statistic: Statistic::Spearman, n_resamples: 20_000, ..Default::default() };
    both(c, "bootstrap_spearman_n200", || {
        black_box(bootstrap_ci(&x, Some(&y), &cfg).unwrap());
    });
}

fn distance_matrix(c: &mut Criterion) {
    let a = random_sparse_topics(300, 20_000, 200, 1).unwrap();
    let b = random_sparse_topics(300, 20_000, 200, 2).unwrap();
    let (a, b): (Vec<_>, Vec<_>) = (a.iter().map(Topic::word_weights).collect(), b.iter().map(Topic::word_weights).collect());
    both(c, "cosine_matrix_300x300", || {
        black_box(cosine_distance_matrix(&a, &b).unwrap());
    });
}

fn stability(c: &mut Criterion) {
    let base = random_sparse_topics(100, 5000, 50, 3).unwrap();
    let models: Vec<TopicModel> = (0..6).map(|i| perturbed_model(&base, 100, 0.2, i).unwrap()).collect();
    both(c, "instance_stability_6x100", || {
        black_box(instance_stability(&models).unwrap());
    });
}

fn crossvalidation(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<Vec<f64>> = (0..300).map(|_| (0..8).map(|_| normal.sample(&mut rng)).collect()).collect();
    let y: Vec<bool> = x.iter().map(|r| r[0] + 0.5 * r[1] + normal.sample(&mut rng) > 0.0).collect();
    let grid = default_grid();
    both(c, "nested_cv_300x8", || {
        black_box(nested_crossvalidate(&x, &y, &grid, 5, 0).unwrap());
    });
}

fn coherence(c: &mut Criterion) {
    let s = SyntheticCorpus::generate(&SyntheticSpec { num_topics: 10, num_docs: 1000, ..Default::default() }).unwrap();
    let topics = s.generator_topics().unwrap();
    let refs: Vec<&Topic> = topics.iter().collect();
    let windows = [DEFAULT_WINDOW_NPMI, DEFAULT_WINDOW_CP, DEFAULT_WINDOW_CV];
    let eval = CoherenceEvaluator::new(&s.corpus, &refs, DEFAULT_TOP_N, windows).unwrap();
    both(c, "coherence_10_topics", || {
        black_box(eval.score_all(&topics));
    });
}

/// The two model-similarity measures behind the stability scores.
fn similarity_t512(c: &mut Criterion) {
    let m1 = TopicModel::new(random_sparse_topics(512, 5000, 20, 5).unwrap(), ModelType::External, 5).unwrap();
    let m2 = TopicModel::new(random_sparse_topics(512, 5000, 20, 6).unwrap(), ModelType::External, 6).unwrap();
    let mut g = c.benchmark_group("model_similarity_t512");
    g.sample_size(10);
    g.bench_function("aucdc", |b| b.iter(|| black_box(aucdc_model_similarity(&m1, &m2).unwrap())));
    g.bench_function("bipartite", |b| b.iter(|| black_box(model_similarity_bipartite(&m1, &m2).unwrap())));
    g.finish();
}

criterion_group!(benches, bootstrap, distance_matrix, stability, crossvalidation, coherence, similarity_t512);
criterion_main!(benches);
