//! Run configuration: a TOML file with one table per stage. Command-line
//! flags override individual values after the file is read.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topcov::analysis::Statistic;
use topcov::coverage::FeatureSet;
use topcov::matcher::{Hyper, Penalty};
use topcov::topics::PreferenceWeights;

use crate::error::{with_path, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub ingest: IngestConfig,
    pub train: TrainConfig,
    pub refset: RefsetConfig,
    pub pairs: PairsConfig,
    pub matcher: MatcherConfig,
    pub coverage: CoverageConfig,
    pub sizes: SizesConfig,
    pub coherence: CoherenceConfig,
    pub correlate: CorrelateConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = with_path(path, std::fs::read_to_string(path))?;
        with_path(path, toml::from_str(&text))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// File with one stopword per line.
    pub stopwords: Option<PathBuf>,
    pub min_freq: u64,
    pub max_doc_frac: f64,
    pub min_token_len: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self { stopwords: None, min_freq: 4, max_doc_frac: 0.5, min_token_len: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Nmf,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Nmf => "nmf",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub topics: usize,
    /// One model per seed; empty means the global seed only.
    pub seeds: Vec<u64>,
    /// LDA document-topic prior, `50 / T` when unset.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub warmup: usize,
    pub iters: usize,
    pub nmf_max_iters: usize,
    pub nmf_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Lda,
            topics: 10,
            seeds: Vec::new(),
            alpha: None,
            beta: 0.01,
            warmup: 50,
            iters: 800,
            nmf_max_iters: 200,
            nmf_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefsetConfig {
    pub weights: PreferenceWeights,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairsConfig {
    pub intervals: usize,
    pub per_interval: usize,
    pub top_words: usize,
    pub top_docs: usize,
}

impl Default for PairsConfig {
    fn default() -> Self {
        Self { intervals: 10, per_interval: 50, top_words: 15, top_docs: 15 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatcherConfig {
    pub features: FeatureSet,
    pub folds: usize,
    pub c_grid: Vec<f64>,
    pub norms: Vec<Penalty>,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            features: FeatureSet::Full,
            folds: 5,
            c_grid: vec![0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0],
            norms: vec![Penalty::L1, Penalty::L2],
        }
    }
}

impl MatcherConfig {
    pub fn grid(&self) -> Vec<Hyper> {
        self.c_grid.iter().flat_map(|&c| self.norms.iter().map(move |&norm| Hyper { c, norm })).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CoverageMeasure {
    Aucdc,
    Sup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageConfig {
    pub measures: Vec<CoverageMeasure>,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self { measures: vec![CoverageMeasure::Aucdc] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SizesConfig {
    pub extra_topics: usize,
    pub eta: f64,
    pub beta: f64,
    pub iters: usize,
    pub threshold: f64,
    /// Feed the reference document weights in as the fixed topics' prior.
    pub doc_prior: bool,
}

impl Default for SizesConfig {
    fn default() -> Self {
        Self {
            extra_topics: 20,
            eta: 1.0,
            beta: 0.01,
            iters: 1000,
            threshold: topcov::models::SIZE_THRESHOLD,
            doc_prior: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceMeasure {
    Npmi,
    Cp,
    Cv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceConfig {
    pub measures: Vec<CoherenceMeasure>,
    pub top_n: usize,
    pub window_npmi: usize,
    pub window_cp: usize,
    pub window_cv: usize,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        use topcov::coherence::*;
        Self {
            measures: vec![CoherenceMeasure::Npmi, CoherenceMeasure::Cp, CoherenceMeasure::Cv],
            top_n: DEFAULT_TOP_N,
            window_npmi: DEFAULT_WINDOW_NPMI,
            window_cp: DEFAULT_WINDOW_CP,
            window_cv: DEFAULT_WINDOW_CV,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateConfig {
    pub key: Vec<String>,
    pub methods: Vec<Statistic>,
    pub n_resamples: usize,
    pub level: f64,
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        Self {
            key: vec!["model_id".into(), "topic_index".into()],
            methods: vec![Statistic::Spearman, Statistic::Pearson],
            n_resamples: 20_000,
            level: 0.95,
        }
    }
}
