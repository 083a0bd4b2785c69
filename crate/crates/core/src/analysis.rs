//! Correlations, percentile bootstrap, inter-annotator agreement and
//! grouping of reference topics by size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::{aucdc, matched_reference_topics, min_distances, CdcCurve};
use crate::error::{Error, Result};
use crate::matcher::Matcher;
use crate::topics::{ReferenceTopicSet, TopicModel};

/// Mean computed around the first element, so a constant list averages to
/// exactly that constant.
fn mean(x: &[f64]) -> f64 {
    let shift = x[0];
    shift + x.iter().map(|v| v - shift).sum::<f64>() / x.len() as f64
}

/// Average ranks starting at 1; tied values share the mean of their ranks.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::arg(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::arg("correlation needs at least two observations"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::arg("correlation input contains a non-finite value"));
    }
    Ok(())
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sample correlation coefficient; `None` when either list is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    check_pair(x, y)?;
    Ok(pearson_unchecked(x, y))
}

/// Pearson correlation of average ranks; `None` when either list is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    check_pair(x, y)?;
    Ok(pearson_unchecked(&ranks(x), &ranks(y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Spearman,
    Pearson,
}

impl Statistic {
    pub fn is_paired(self) -> bool {
        !matches!(self, Statistic::Mean)
    }

    fn eval(self, x: &[f64], y: &[f64]) -> Option<f64> {
        match self {
            Statistic::Mean => Some(mean(x)),
            Statistic::Pearson => pearson_unchecked(x, y),
            Statistic::Spearman => pearson_unchecked(&ranks(x), &ranks(y)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub statistic: Statistic,
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { statistic: Statistic::Mean, n_resamples: 20_000, level: 0.95, seed: 0 }
    }
}

/// Percentile bootstrap interval, serialized as the analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub statistic: Statistic,
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_resamples: usize,
    pub seed: u64,
    pub discarded: usize,
}

/// Quantile of sorted data with linear interpolation between order
/// statistics at position `(n - 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap of `statistic` over `x` (or over `(x, y)` pairs,
/// resampled jointly, for the correlation statistics).
///
/// Resample `i` draws from its own ChaCha8 stream, so the result depends only
/// on the seed and not on thread scheduling. Resamples whose statistic is
/// undefined are discarded and counted.
pub fn bootstrap_ci(x: &[f64], y: Option<&[f64]>, config: &BootstrapConfig) -> Result<BootstrapCI> {
    let stat = config.statistic;
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::arg(format!("confidence level {} outside (0, 1)", config.level)));
    }
    if config.n_resamples == 0 {
        return Err(Error::arg("need at least one resample"));
    }
    let y = match (stat.is_paired(), y) {
        (true, Some(y)) => {
            check_pair(x, y)?;
            y
        }
        (true, None) => return Err(Error::arg("correlation bootstrap needs paired data")),
        (false, _) => {
            if x.len() < 2 {
                return Err(Error::arg("bootstrap needs at least two values"));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg("bootstrap input contains a non-finite value"));
            }
            &[][..]
        }
    };
    let point = stat
        .eval(x, y)
        .ok_or_else(|| Error::arg("statistic is undefined on the full sample (constant input)"))?;

    let n = x.len();
    let draws = crate::par::map_range(config.n_resamples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let mut rx = Vec::with_capacity(n);
        let mut ry = Vec::with_capacity(if y.is_empty() { 0 } else { n });
        for _ in 0..n {
            let k = rng.random_range(0..n);
            rx.push(x[k]);
            if !y.is_empty() {
                ry.push(y[k]);
            }
        }
        stat.eval(&rx, &ry)
    });
    let mut values: Vec<f64> = draws.iter().flatten().copied().collect();
    let discarded = draws.len() - values.len();
    if values.is_empty() {
        return Err(Error::arg("every bootstrap resample had an undefined statistic"));
    }
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - config.level) / 2.0;
    Ok(BootstrapCI {
        statistic: stat,
        point,
        lo: quantile_sorted(&values, tail),
        hi: quantile_sorted(&values, 1.0 - tail),
        level: config.level,
        n_resamples: config.n_resamples,
        seed: config.seed,
        discarded,
    })
}

/// Indices split into four contiguous groups by ascending size, ties broken
/// by index. Groups differ in size by at most one; the extra members go to
/// the last groups.
pub fn quartile_split(sizes: &[usize]) -> Result<[Vec<usize>; 4]> {
    let n = sizes.len();
    if n < 4 {
        return Err(Error::arg(format!("quartile split needs at least 4 topics, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (sizes[i], i));
    let (base, extra) = (n / 4, n % 4);
    let mut groups: [Vec<usize>; 4] = Default::default();
    let mut start = 0;
    for (g, group) in groups.iter_mut().enumerate() {
        let len = base + usize::from(g >= 4 - extra);
        *group = order[start..start + len].to_vec();
        start += len;
    }
    Ok(groups)
}

/// Coverage measure used by [`coverage_by_group`].
pub enum GroupMeasure<'a> {
    Supervised(&'a dyn Matcher),
    AuCdc,
}

/// Coverage of the model restricted to each group of reference-topic
/// indices; `None` for an empty group.
pub fn coverage_by_group(
    model: &TopicModel,
    refset: &ReferenceTopicSet,
    groups: &[Vec<usize>],
    measure: GroupMeasure<'_>,
) -> Result<Vec<Option<f64>>> {
    for (g, group) in groups.iter().enumerate() {
        if let Some(&bad) = group.iter().find(|&&i| i >= refset.len()) {
            return Err(Error::arg(format!("group {g} refers to reference topic {bad} of {}", refset.len())));
        }
    }
    match measure {
        GroupMeasure::Supervised(matcher) => {
            let matched = matched_reference_topics(&model.topics, &refset.topics, matcher)?;
            Ok(groups
                .iter()
                .map(|g| {
                    (!g.is_empty()).then(|| g.iter().filter(|&&i| matched[i]).count() as f64 / g.len() as f64)
                })
                .collect())
        }
        GroupMeasure::AuCdc => {
            let dist = min_distances(&model.topics, &refset.topics)?;
            Ok(groups
                .iter()
                .map(|g| {
                    (!g.is_empty()).then(|| {
                        let sub: Vec<f64> = g.iter().map(|&i| dist[i]).collect();
                        aucdc(&CdcCurve::from_min_distances(&sub))
                    })
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementMetric {
    Nominal,
    Ordinal,
}

/// Krippendorff's alpha from an annotator x item matrix (`None` = missing).
///
/// Uses the coincidence-matrix formulation. The ordinal distance between
/// values `c <= k` is `(sum_{c<=g<=k} n_g - (n_c + n_k)/2)^2`, with `n_g` the
/// pairable frequency of value `g`. Items with fewer than two ratings are
/// ignored. When the observed disagreement is zero the result is 1.
pub fn krippendorff_alpha(ratings: &[Vec<Option<f64>>], metric: AgreementMetric) -> Result<f64> {
    let n_items = ratings.iter().map(Vec::len).max().unwrap_or(0);
    if ratings.iter().any(|r| r.len() != n_items) {
        return Err(Error::arg("every annotator row must cover the same items"));
    }
    if ratings.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::arg("ratings contain a non-finite value"));
    }
    let mut values: Vec<f64> = ratings.iter().flatten().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let cat = |v: f64| values.binary_search_by(|p| p.total_cmp(&v)).unwrap();

    let k = values.len();
    let mut coincidence = vec![vec![0.0; k]; k];
    let mut pairable_items = 0;
    for item in 0..n_items {
        let cats: Vec<usize> = ratings.iter().filter_map(|r| r[item]).map(cat).collect();
        let m = cats.len();
        if m < 2 {
            continue;
        }
        pairable_items += 1;
        let w = 1.0 / (m - 1) as f64;
        for (i, &a) in cats.iter().enumerate() {
            for (j, &b) in cats.iter().enumerate() {
                if i != j {
                    coincidence[a][b] += w;
                }
            }
        }
    }
    if pairable_items == 0 {
        return Err(Error::arg("no item has two or more ratings"));
    }

    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let total: f64 = marginals.iter().sum();
    let delta = |c: usize, d: usize| -> f64 {
        match metric {
            AgreementMetric::Nominal => f64::from(u8::from(c != d)),
            AgreementMetric::Ordinal => {
                let (lo, hi) = (c.min(d), c.max(d));
                let s: f64 = marginals[lo..=hi].iter().sum::<f64>() - (marginals[lo] + marginals[hi]) / 2.0;
                s * s
            }
        }
    };
    let (mut observed, mut expected) = (0.0, 0.0);
    for c in 0..k {
        for d in 0..k {
            let dl = delta(c, d);
            observed += coincidence[c][d] * dl;
            expected += marginals[c] * marginals[d] * dl;
        }
    }
    if observed == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (total - 1.0) * observed / expected)
}
