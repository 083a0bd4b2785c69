//! Coverage of reference topics by model topics: the coverage-distance curve
//! (CDC), its area (AuCDC), supervised coverage and topic-level scores.

use std::fmt::Write as _;

use crate::distance::{
    cosine_distance, cosine_distance_matrix, hellinger_distance, l1_distance, l2_distance,
    normalize_to_distribution,
};
use crate::error::{Error, Result};
use crate::matcher::Matcher;
use crate::sparse::SparseVector;
use crate::topics::{ReferenceTopicSet, Topic, TopicModel};

/// Number of equidistant subintervals of `[0, 1]` the curve is sampled on.
pub const CDC_INTERVALS: usize = 50;

/// Which of the eight pair features a matcher consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    #[default]
    Full,
    /// Drops the word and document cosine distances.
    NoCosine,
}

impl FeatureSet {
    pub fn len(self) -> usize {
        match self {
            FeatureSet::Full => 8,
            FeatureSet::NoCosine => 6,
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn names(self) -> Vec<&'static str> {
        let all = PairFeatures::NAMES;
        match self {
            FeatureSet::Full => all.to_vec(),
            FeatureSet::NoCosine => [&all[1..4], &all[5..8]].concat(),
        }
    }
}

/// Distances between two topics: cosine, Hellinger, L1 and L2 over the
/// normalized word distributions, then the same four over the normalized
/// document distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFeatures(pub [f64; 8]);

impl PairFeatures {
    pub const NAMES: [&'static str; 8] =
        ["word_cos", "word_hellinger", "word_l1", "word_l2", "doc_cos", "doc_hellinger", "doc_l1", "doc_l2"];

    pub fn values(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn select(&self, set: FeatureSet) -> Vec<f64> {
        match set {
            FeatureSet::Full => self.0.to_vec(),
            FeatureSet::NoCosine => [&self.0[1..4], &self.0[5..8]].concat(),
        }
    }
}

fn four_distances(a: &SparseVector, b: &SparseVector, what: &str) -> Result<[f64; 4]> {
    let p = normalize_to_distribution(a)?;
    let q = normalize_to_distribution(b)?;
    if p.is_degenerate() || q.is_degenerate() {
        return Err(Error::arg(format!("topic pair has an all-zero {what} vector")));
    }
    Ok([
        cosine_distance(p.as_sparse(), q.as_sparse())?,
        hellinger_distance(&p, &q)?,
        l1_distance(p.as_sparse(), q.as_sparse())?,
        l2_distance(p.as_sparse(), q.as_sparse())?,
    ])
}

pub fn pair_features(t1: &Topic, t2: &Topic) -> Result<PairFeatures> {
    let w = four_distances(t1.word_weights(), t2.word_weights(), "word")?;
    let d = four_distances(t1.doc_weights(), t2.doc_weights(), "document")?;
    Ok(PairFeatures([w[0], w[1], w[2], w[3], d[0], d[1], d[2], d[3]]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdcCurve {
    thresholds: Vec<f64>,
    coverages: Vec<f64>,
}

impl CdcCurve {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn coverages(&self) -> &[f64] {
        &self.coverages
    }

    /// Curve from per-reference-topic minimum distances: coverage at `t` is the
    /// fraction of distances strictly below `t`.
    pub fn from_min_distances(min_distances: &[f64]) -> Self {
        let thresholds: Vec<f64> = (0..=CDC_INTERVALS).map(|i| i as f64 / CDC_INTERVALS as f64).collect();
        let r = min_distances.len().max(1) as f64;
        let coverages = thresholds
            .iter()
            .map(|&t| min_distances.iter().filter(|&&d| d < t).count() as f64 / r)
            .collect();
        Self { thresholds, coverages }
    }

    /// `threshold,coverage` CSV with six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,coverage\n");
        for (t, c) in self.thresholds.iter().zip(&self.coverages) {
            let _ = writeln!(out, "{t:.6},{c:.6}");
        }
        out
    }
}

fn word_vectors(topics: &[Topic]) -> Vec<&SparseVector> {
    topics.iter().map(Topic::word_weights).collect()
}

fn check_nonzero(topics: &[Topic], side: &str) -> Result<()> {
    match topics.iter().position(|t| t.word_weights().is_zero()) {
        Some(i) => Err(Error::arg(format!("{side} topic {i} has an all-zero word vector"))),
        None => Ok(()),
    }
}

/// Cosine distance from each reference topic to its nearest model topic.
pub fn min_distances(model_topics: &[Topic], reference: &[Topic]) -> Result<Vec<f64>> {
    if model_topics.is_empty() || reference.is_empty() {
        return Err(Error::arg("coverage needs a non-empty model and reference set"));
    }
    check_nonzero(model_topics, "model")?;
    check_nonzero(reference, "reference")?;
    let m = cosine_distance_matrix(&word_vectors(reference), &word_vectors(model_topics))?;
    Ok(m.into_iter().map(|row| row.into_iter().fold(f64::INFINITY, f64::min)).collect())
}

pub fn build_cdc_curve(model: &TopicModel, refset: &ReferenceTopicSet) -> Result<CdcCurve> {
    Ok(CdcCurve::from_min_distances(&min_distances(&model.topics, &refset.topics)?))
}

/// Trapezoidal area under the curve with subinterval width `1/50`.
pub fn aucdc(curve: &CdcCurve) -> f64 {
    let c = &curve.coverages;
    let sum: f64 = c.windows(2).map(|w| w[0] + w[1]).sum();
    sum / (2.0 * CDC_INTERVALS as f64)
}

pub fn aucdc_coverage(model: &TopicModel, refset: &ReferenceTopicSet) -> Result<f64> {
    Ok(aucdc(&build_cdc_curve(model, refset)?))
}

fn check_matcher(matcher: &dyn Matcher) -> Result<()> {
    let want = matcher.feature_set().len();
    if matcher.num_features() != want {
        return Err(Error::Config(format!(
            "matcher expects {} features but its feature set provides {want}",
            matcher.num_features()
        )));
    }
    Ok(())
}

/// Whether `a` and `b` match according to `matcher`.
pub fn topics_match(a: &Topic, b: &Topic, matcher: &dyn Matcher) -> Result<bool> {
    let f = pair_features(a, b)?;
    Ok(matcher.matches(&f.select(matcher.feature_set())))
}

/// For each reference topic, whether some model topic matches it.
pub fn matched_reference_topics(
    model_topics: &[Topic],
    reference: &[Topic],
    matcher: &dyn Matcher,
) -> Result<Vec<bool>> {
    check_matcher(matcher)?;
    crate::par::try_map_range(reference.len(), |r| {
        for m in model_topics {
            if topics_match(&reference[r], m, matcher)? {
                return Ok(true);
            }
        }
        Ok(false)
    })
}

/// Fraction of reference topics matched by at least one model topic.
pub fn supervised_coverage(model: &TopicModel, refset: &ReferenceTopicSet, matcher: &dyn Matcher) -> Result<f64> {
    if refset.is_empty() {
        return Err(Error::arg("supervised coverage of an empty reference set"));
    }
    let matched = matched_reference_topics(&model.topics, &refset.topics, matcher)?;
    Ok(matched.iter().filter(|&&m| m).count() as f64 / matched.len() as f64)
}

/// 1 if the topic matches some reference topic, else 0.
pub fn topic_score_sup(topic: &Topic, refset: &ReferenceTopicSet, matcher: &dyn Matcher) -> Result<u8> {
    check_matcher(matcher)?;
    for r in &refset.topics {
        if topics_match(topic, r, matcher)? {
            return Ok(1);
        }
    }
    Ok(0)
}

/// Highest cosine similarity between the topic and any reference topic.
pub fn topic_score_cos(topic: &Topic, refset: &ReferenceTopicSet) -> Result<f64> {
    let mut best = 0.0f64;
    for (i, r) in refset.topics.iter().enumerate() {
        let d = cosine_distance(topic.word_weights(), r.word_weights())
            .map_err(|e| Error::arg(format!("reference topic {i}: {e}")))?;
        best = best.max(1.0 - d);
    }
    Ok(best)
}

/// Line chart of one or more curves on `[0,1] x [0,1]`.
pub fn render_svg(curves: &[(&str, &CdcCurve)]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const PAD: f64 = 48.0;
    const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
    let (pw, ph) = (W - 2.0 * PAD, H - 2.0 * PAD);
    let x = |t: f64| PAD + t * pw;
    let y = |c: f64| H - PAD - c * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2}" fill="none" stroke="black"/>"#,
        x(0.0),
        y(1.0),
        x(0.0),
        y(0.0),
        x(1.0),
        y(0.0)
    );
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{v:.1}</text>"#, x(v), y(0.0) + 14.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{v:.1}</text>"#, x(0.0) - 4.0, y(v) + 3.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">distance threshold</text>"#, W / 2.0, H - 8.0);
    let _ = writeln!(s, r#"<text x="12" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 12 {:.2})">coverage</text>"#, H / 2.0, H / 2.0);
    for (i, (label, curve)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = curve
            .thresholds
            .iter()
            .zip(&curve.coverages)
            .map(|(&t, &c)| format!("{:.2},{:.2}", x(t), y(c)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = PAD + 14.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, W - PAD - 110.0, W - PAD - 92.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#, W - PAD - 88.0, ly + 3.0, escape_xml(label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
