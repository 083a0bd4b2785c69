//! Supervised topic matching: topic-pair sampling for annotation, label
//! aggregation, an L1/L2-regularized logistic regression classifier and
//! (nested) stratified cross-validation scored by F1.

use std::io::Read;

use nalgebra::{DMatrix, DVector};
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::FeatureSet;
use crate::distance::cosine_distance_matrix;
use crate::error::{Error, Result};
use crate::topics::Topic;

/// A binary decision on a vector of pair features.
pub trait Matcher: Sync {
    fn feature_set(&self) -> FeatureSet;
    fn num_features(&self) -> usize;
    fn matches(&self, features: &[f64]) -> bool;
}

/// Matcher backed by a closure; mostly useful as a test oracle.
pub struct FnMatcher<F> {
    set: FeatureSet,
    f: F,
}

impl<F: Fn(&[f64]) -> bool + Sync> FnMatcher<F> {
    pub fn new(set: FeatureSet, f: F) -> Self {
        Self { set, f }
    }
}

impl<F: Fn(&[f64]) -> bool + Sync> Matcher for FnMatcher<F> {
    fn feature_set(&self) -> FeatureSet {
        self.set
    }
    fn num_features(&self) -> usize {
        self.set.len()
    }
    fn matches(&self, features: &[f64]) -> bool {
        (self.f)(features)
    }
}

/// Matches when one selected feature is strictly below a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdMatcher {
    pub set: FeatureSet,
    pub feature: usize,
    pub threshold: f64,
}

impl Matcher for ThresholdMatcher {
    fn feature_set(&self) -> FeatureSet {
        self.set
    }
    fn num_features(&self) -> usize {
        self.set.len()
    }
    fn matches(&self, features: &[f64]) -> bool {
        features[self.feature] < self.threshold
    }
}

// ---------------------------------------------------------------------------
// Pair sampling and labels

/// Samples unordered pairs of distinct pool positions, stratified by the
/// cosine distance of their word vectors: `intervals` equal bins over `[0, 1]`
/// (last bin closed), at most `per_interval` pairs drawn without replacement
/// from each.
pub fn sample_topic_pairs(pool: &[Topic], intervals: usize, per_interval: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if pool.len() < 2 {
        return Err(Error::arg("pair sampling needs a pool of at least two topics"));
    }
    if intervals == 0 {
        return Err(Error::arg("at least one distance interval is required"));
    }
    let vecs: Vec<_> = pool.iter().map(Topic::word_weights).collect();
    let dist = cosine_distance_matrix(&vecs, &vecs)?;
    let mut bins: Vec<Vec<(usize, usize)>> = vec![Vec::new(); intervals];
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let b = ((dist[i][j] * intervals as f64) as usize).min(intervals - 1);
            bins[b].push((i, j));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for bin in &bins {
        let take = per_interval.min(bin.len());
        let mut picked = index::sample(&mut rng, bin.len(), take).into_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|k| bin[k]));
    }
    Ok(out)
}

/// Threshold on the mean annotator label above which a pair counts as a match.
pub const MATCH_THRESHOLD: f64 = 0.75;

/// True iff the mean of the ternary labels is strictly above 0.75.
pub fn aggregate_labels(labels: &[f64]) -> Result<bool> {
    if labels.is_empty() {
        return Err(Error::arg("no labels to aggregate"));
    }
    if let Some(bad) = labels.iter().find(|l| ![0.0, 0.5, 1.0].contains(*l)) {
        return Err(Error::arg(format!("label {bad} is not one of 0, 0.5, 1")));
    }
    Ok(labels.iter().sum::<f64>() / labels.len() as f64 > MATCH_THRESHOLD)
}

/// One row of an annotation file.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedPair {
    pub pair_id: String,
    pub topic_a: String,
    pub topic_b: String,
    pub labels: Vec<f64>,
    pub binary: bool,
}

/// Reads `pair_id, topic_a_ref, topic_b_ref, label_1, label_2, ...` CSV.
pub fn read_annotations<R: Read>(reader: R) -> Result<Vec<AnnotatedPair>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
    let expect = ["pair_id", "topic_a_ref", "topic_b_ref"];
    if headers.len() < 4 || headers.iter().take(3).ne(expect.iter().copied()) {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()) });
    }
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let labels = rec
            .iter()
            .skip(3)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("label {s:?}: {e}") }))
            .collect::<Result<Vec<_>>>()?;
        let binary = aggregate_labels(&labels).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        out.push(AnnotatedPair {
            pair_id: rec[0].to_owned(),
            topic_a: rec[1].to_owned(),
            topic_b: rec[2].to_owned(),
            labels,
            binary,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Logistic regression

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Penalty {
    L1,
    L2,
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    #[serde(rename = "C")]
    pub c: f64,
    pub norm: Penalty,
}

/// `C` in {0.001, ..., 1000} crossed with {L1, L2}.
pub fn default_grid() -> Vec<Hyper> {
    [0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]
        .into_iter()
        .flat_map(|c| [Hyper { c, norm: Penalty::L1 }, Hyper { c, norm: Penalty::L2 }])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub norm: Penalty,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(default)]
    pub feature_set: FeatureSet,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticModel {
    pub fn predict_prob(&self, features: &[f64]) -> f64 {
        let z: f64 = self.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + self.bias;
        sigmoid(z)
    }

    pub fn predict(&self, features: &[f64]) -> bool {
        self.predict_prob(features) > 0.5
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let file = MatcherFile { model: self.clone(), feature_order: self.feature_set.names().join(",") };
        Ok(serde_json::to_vec_pretty(&file)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: MatcherFile = serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))?;
        let expected = file.model.feature_set.names().join(",");
        if file.feature_order != expected {
            return Err(Error::Format(format!("feature order {:?} does not match {expected:?}", file.feature_order)));
        }
        if file.model.weights.len() != file.model.feature_set.len() {
            return Err(Error::Format("weight count does not match the feature set".into()));
        }
        if !file.model.weights.iter().chain([&file.model.bias]).all(|v| v.is_finite()) {
            return Err(Error::Format("non-finite matcher parameters".into()));
        }
        Ok(file.model)
    }
}

impl Matcher for LogisticModel {
    fn feature_set(&self) -> FeatureSet {
        self.feature_set
    }
    fn num_features(&self) -> usize {
        self.weights.len()
    }
    fn matches(&self, features: &[f64]) -> bool {
        self.predict(features)
    }
}

#[derive(Serialize, Deserialize)]
struct MatcherFile {
    #[serde(flatten)]
    model: LogisticModel,
    feature_order: String,
}

/// Regularized mean logistic loss over a fixed dataset. Parameters are laid
/// out as `[w_0, ..., w_{d-1}, bias]`.
pub struct LogisticObjective<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    lambda: f64,
    norm: Penalty,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a [Vec<f64>], y: &'a [bool], c: f64, norm: Penalty) -> Self {
        Self { x, y, lambda: 1.0 / c, norm }
    }

    fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    fn margins(&self, params: &[f64]) -> Vec<f64> {
        let d = self.dim();
        self.x
            .iter()
            .map(|row| row.iter().zip(&params[..d]).map(|(a, b)| a * b).sum::<f64>() + params[d])
            .collect()
    }

    pub fn data_loss(&self, params: &[f64]) -> f64 {
        let z = self.margins(params);
        z.iter().zip(self.y).map(|(&z, &y)| softplus(z) - if y { z } else { 0.0 }).sum::<f64>() / self.x.len() as f64
    }

    fn penalty(&self, params: &[f64]) -> f64 {
        let w = &params[..self.dim()];
        match self.norm {
            Penalty::L1 => self.lambda * w.iter().map(|v| v.abs()).sum::<f64>(),
            Penalty::L2 => 0.5 * self.lambda * w.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    /// Full objective, including the non-smooth L1 term.
    pub fn value(&self, params: &[f64]) -> f64 {
        self.data_loss(params) + self.penalty(params)
    }

    /// Part of the objective that is differentiable: the data loss, plus the
    /// penalty when it is L2.
    pub fn smooth_value(&self, params: &[f64]) -> f64 {
        match self.norm {
            Penalty::L1 => self.data_loss(params),
            Penalty::L2 => self.value(params),
        }
    }

    /// Gradient of [`Self::smooth_value`].
    pub fn smooth_gradient(&self, params: &[f64]) -> Vec<f64> {
        self.gradient_and_hessian(params, false).0
    }

    fn gradient_and_hessian(&self, params: &[f64], want_hessian: bool) -> (Vec<f64>, DMatrix<f64>) {
        let d = self.dim();
        let n = self.x.len() as f64;
        let mut g = vec![0.0; d + 1];
        let mut h = DMatrix::zeros(if want_hessian { d + 1 } else { 0 }, if want_hessian { d + 1 } else { 0 });
        for (row, (&z, &y)) in self.x.iter().zip(self.margins(params).iter().zip(self.y)) {
            let p = sigmoid(z);
            let r = p - if y { 1.0 } else { 0.0 };
            for j in 0..d {
                g[j] += r * row[j];
            }
            g[d] += r;
            if want_hessian {
                let s = p * (1.0 - p);
                for a in 0..=d {
                    let xa = if a < d { row[a] } else { 1.0 };
                    for b in a..=d {
                        let xb = if b < d { row[b] } else { 1.0 };
                        h[(a, b)] += s * xa * xb;
                    }
                }
            }
        }
        g.iter_mut().for_each(|v| *v /= n);
        if want_hessian {
            for a in 0..=d {
                for b in a..=d {
                    let v = h[(a, b)] / n;
                    h[(a, b)] = v;
                    h[(b, a)] = v;
                }
            }
        }
        if self.norm == Penalty::L2 {
            for j in 0..d {
                g[j] += self.lambda * params[j];
                if want_hessian {
                    h[(j, j)] += self.lambda;
                }
            }
        }
        (g, h)
    }

    /// Norm of the minimum-norm subgradient; zero exactly at the optimum.
    pub fn optimality(&self, params: &[f64]) -> f64 {
        let g = self.smooth_gradient(params);
        let d = self.dim();
        let mut acc = g[d] * g[d];
        for j in 0..d {
            let v = match self.norm {
                Penalty::L2 => g[j],
                Penalty::L1 if params[j] != 0.0 => g[j] + self.lambda * params[j].signum(),
                Penalty::L1 => (g[j].abs() - self.lambda).max(0.0),
            };
            acc += v * v;
        }
        acc.sqrt()
    }
}

/// Result of a logistic fit with optimizer diagnostics.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub model: LogisticModel,
    /// Objective value at the start and after every accepted step.
    pub loss_trace: Vec<f64>,
    pub optimality: f64,
    pub converged: bool,
}

pub const GRADIENT_TOLERANCE: f64 = 1e-6;
const MAX_NEWTON_STEPS: usize = 500;

/// Minimizes mean logistic loss plus `(1/C)` times the penalty (`|w|_1` or
/// `|w|^2 / 2`, bias unpenalized) with damped (proximal) Newton steps.
pub fn fit_logistic(x: &[Vec<f64>], y: &[bool], c: f64, norm: Penalty) -> Result<LogisticFit> {
    validate_training_data(x, y, c)?;
    let obj = LogisticObjective::new(x, y, c, norm);
    let d = obj.dim();
    let mut params = vec![0.0; d + 1];
    let mut f = obj.value(&params);
    let mut trace = vec![f];
    let mut converged = false;

    for _ in 0..MAX_NEWTON_STEPS {
        if obj.optimality(&params) < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        let (g, h) = obj.gradient_and_hessian(&params, true);
        let step = match norm {
            Penalty::L2 => newton_direction(&g, &h),
            Penalty::L1 => l1_quadratic_direction(&params, &g, &h, obj.lambda),
        };
        // directional decrease of the model objective
        let l1_term = |p: &[f64]| if norm == Penalty::L1 { obj.lambda * p[..d].iter().map(|v| v.abs()).sum::<f64>() } else { 0.0 };
        let trial_full: Vec<f64> = params.iter().zip(&step).map(|(a, b)| a + b).collect();
        let delta = g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>() + l1_term(&trial_full) - l1_term(&params);
        if !(delta < 0.0) {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&step).map(|(a, b)| a + alpha * b).collect();
            let ft = obj.value(&trial);
            if ft <= f + 1e-4 * alpha * delta {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((p, ft)) if ft <= f => {
                params = p;
                f = ft;
                trace.push(f);
            }
            _ => break,
        }
    }
    let optimality = obj.optimality(&params);
    converged |= optimality < GRADIENT_TOLERANCE;
    if !params.iter().all(|v| v.is_finite()) {
        return Err(Error::Training("logistic regression diverged".into()));
    }
    let bias = params[d];
    params.truncate(d);
    Ok(LogisticFit {
        model: LogisticModel { weights: params, bias, norm, c, feature_set: feature_set_for(d) },
        loss_trace: trace,
        optimality,
        converged,
    })
}

fn feature_set_for(d: usize) -> FeatureSet {
    if d == FeatureSet::NoCosine.len() {
        FeatureSet::NoCosine
    } else {
        FeatureSet::Full
    }
}

pub fn train_logistic(x: &[Vec<f64>], y: &[bool], c: f64, norm: Penalty) -> Result<LogisticModel> {
    Ok(fit_logistic(x, y, c, norm)?.model)
}

fn validate_training_data(x: &[Vec<f64>], y: &[bool], c: f64) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::arg("feature rows and labels must be non-empty and of equal length"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::arg(format!("regularization constant C={c} must be positive")));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::arg("feature rows of different lengths"));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::arg("non-finite feature value"));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    Ok(())
}

fn newton_direction(g: &[f64], h: &DMatrix<f64>) -> Vec<f64> {
    let rhs = DVector::from_iterator(g.len(), g.iter().map(|v| -v));
    let mut damping = 0.0;
    let scale = (0..g.len()).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
    for _ in 0..20 {
        let mut hd = h.clone();
        for i in 0..g.len() {
            hd[(i, i)] += damping;
        }
        if let Some(ch) = hd.cholesky() {
            return ch.solve(&rhs).iter().copied().collect();
        }
        damping = if damping == 0.0 { 1e-12 * scale } else { damping * 10.0 };
    }
    rhs.iter().copied().collect()
}

/// Minimizes `g.d + d'Hd/2 + lambda |w + d|_1` (bias unpenalized) by cyclic
/// coordinate descent.
fn l1_quadratic_direction(params: &[f64], g: &[f64], h: &DMatrix<f64>, lambda: f64) -> Vec<f64> {
    let n = params.len();
    let bias = n - 1;
    let mut step = vec![0.0; n];
    let mut hd = vec![0.0; n];
    let floor = 1e-12 * (0..n).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
    for _ in 0..2000 {
        let mut max_change = 0.0f64;
        for j in 0..n {
            let a = h[(j, j)].max(floor);
            let b = g[j] + hd[j] - h[(j, j)] * step[j];
            let new = if j == bias {
                -b / a
            } else {
                let u = params[j] - b / a;
                let t = lambda / a;
                u.signum() * (u.abs() - t).max(0.0) - params[j]
            };
            let change = new - step[j];
            if change != 0.0 {
                for i in 0..n {
                    hd[i] += h[(i, j)] * change;
                }
                step[j] = new;
                max_change = max_change.max(change.abs());
            }
        }
        if max_change < 1e-14 {
            break;
        }
    }
    step
}

// ---------------------------------------------------------------------------
// Evaluation

/// `2PR / (P + R)`; 0 whenever there are no true positives.
pub fn f1_score(predictions: &[bool], labels: &[bool]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::arg("predictions and labels differ in length"));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

/// Splits `0..labels.len()` into `k` disjoint folds with the positive rate of
/// each fold close to the global one. Falls back to a plain shuffled split
/// (with a logged warning) when the minority class has fewer than `k` members.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > labels.len() {
        return Err(Error::arg(format!("cannot split {} examples into {k} folds", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let order: Vec<usize> = if pos.len().min(neg.len()) < k {
        log::warn!("minority class has {} examples, fewer than {k} folds; using an unstratified split", pos.len().min(neg.len()));
        let mut all: Vec<usize> = (0..labels.len()).collect();
        all.shuffle(&mut rng);
        all
    } else {
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        pos.into_iter().chain(neg).collect()
    };
    let mut folds = vec![Vec::new(); k];
    for (p, i) in order.into_iter().enumerate() {
        folds[p % k].push(i);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

fn gather<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

fn complement(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = folds.iter().enumerate().filter(|(f, _)| *f != held_out).flat_map(|(_, v)| v.clone()).collect();
    idx.sort_unstable();
    idx
}

/// Mean F1 of `hyper` over the folds, or the first training error.
fn score_folds(x: &[Vec<f64>], y: &[bool], folds: &[Vec<usize>], hyper: Hyper) -> Result<f64> {
    let mut total = 0.0;
    for (f, test) in folds.iter().enumerate() {
        let train = complement(folds, f);
        let model = train_logistic(&gather(x, &train), &gather(y, &train), hyper.c, hyper.norm)?;
        let preds: Vec<bool> = test.iter().map(|&i| model.predict(&x[i])).collect();
        total += f1_score(&preds, &gather(y, test))?;
    }
    Ok(total / folds.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvSelection {
    pub best: Hyper,
    pub mean_f1: f64,
    /// Mean F1 per grid point; `None` where training failed on some fold.
    pub grid_scores: Vec<Option<f64>>,
}

/// Picks the grid point with the highest mean F1 over `k` stratified folds;
/// ties go to the earlier grid point.
pub fn crossvalidate(x: &[Vec<f64>], y: &[bool], grid: &[Hyper], k: usize, seed: u64) -> Result<CvSelection> {
    if grid.is_empty() {
        return Err(Error::arg("empty hyperparameter grid"));
    }
    if x.len() != y.len() {
        return Err(Error::arg("feature rows and labels differ in length"));
    }
    let folds = stratified_folds(y, k, seed)?;
    let scores = crate::par::map_slice(grid, |&h| score_folds(x, y, &folds, h));
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        match s {
            Ok(v) if best.map_or(true, |(_, b)| *v > b) => best = Some((i, *v)),
            Ok(_) => {}
            Err(e) => log::debug!("grid point {:?} excluded: {e}", grid[i]),
        }
    }
    let (i, mean_f1) = best.ok_or_else(|| Error::Training("every grid point failed to train".into()))?;
    Ok(CvSelection { best: grid[i], mean_f1, grid_scores: scores.into_iter().map(Result::ok).collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub fold_f1: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of `fold_f1`.
    pub std: f64,
    /// Hyperparameters chosen by the inner loop for each outer fold.
    pub selected: Vec<Hyper>,
}

fn inner_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Outer `k`-fold loop scoring a model whose hyperparameters are chosen by an
/// inner `k`-fold [`crossvalidate`] on the outer training folds.
pub fn nested_crossvalidate(x: &[Vec<f64>], y: &[bool], grid: &[Hyper], k: usize, seed: u64) -> Result<CvReport> {
    let folds = stratified_folds(y, k, seed)?;
    let results = crate::par::try_map_range(folds.len(), |f| -> Result<(f64, Hyper)> {
        let train = complement(&folds, f);
        let (xt, yt) = (gather(x, &train), gather(y, &train));
        let sel = crossvalidate(&xt, &yt, grid, k, inner_seed(seed, f))?;
        let model = train_logistic(&xt, &yt, sel.best.c, sel.best.norm)?;
        let preds: Vec<bool> = folds[f].iter().map(|&i| model.predict(&x[i])).collect();
        Ok((f1_score(&preds, &gather(y, &folds[f]))?, sel.best))
    })?;
    let fold_f1: Vec<f64> = results.iter().map(|r| r.0).collect();
    let mean = fold_f1.iter().sum::<f64>() / fold_f1.len() as f64;
    let std = (fold_f1.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / fold_f1.len() as f64).sqrt();
    Ok(CvReport { fold_f1, mean, std, selected: results.iter().map(|r| r.1).collect() })
}

/// Selects hyperparameters by (non-nested) cross-validation and refits on all
/// data.
pub fn train_matcher(x: &[Vec<f64>], y: &[bool], grid: &[Hyper], k: usize, seed: u64) -> Result<(LogisticModel, CvSelection)> {
    let sel = crossvalidate(x, y, grid, k, seed)?;
    let model = train_logistic(x, y, sel.best.c, sel.best.norm)?;
    Ok((model, sel))
}
