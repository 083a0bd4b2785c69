//! Stability of a set of model instances: bipartite-matching similarity,
//! reference-set similarity and AuCDC similarity, each averaged over all
//! unordered instance pairs.

use crate::coverage::{matched_reference_topics, CdcCurve};
use crate::distance::cosine_distance_matrix;
use crate::error::{Error, Result};
use crate::matcher::Matcher;
use crate::topics::{ReferenceTopicSet, Topic, TopicModel};

/// A one-to-one pairing of rows and columns of a similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, column)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total_similarity: f64,
}

/// Maximum-similarity assignment of `min(rows, cols)` pairs.
///
/// Solved as a min-cost assignment on the negated matrix, padded to a square
/// with zero-similarity dummy rows or columns (shortest augmenting paths with
/// potentials, `O(n^3)`).
pub fn hungarian_max(similarity: &[Vec<f64>]) -> Result<Assignment> {
    let rows = similarity.len();
    let cols = similarity.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::arg("assignment on an empty matrix"));
    }
    if similarity.iter().any(|r| r.len() != cols) {
        return Err(Error::arg("ragged similarity matrix"));
    }
    if similarity.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::arg("non-finite similarity"));
    }
    let n = rows.max(cols);
    let cost = |i: usize, j: usize| if i < rows && j < cols { -similarity[i][j] } else { 0.0 };

    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=n)
        .filter_map(|j| {
            let i = owner[j] - 1;
            (i < rows && j - 1 < cols).then_some((i, j - 1))
        })
        .collect();
    pairs.sort_unstable();
    let total_similarity = pairs.iter().map(|&(i, j)| similarity[i][j]).sum();
    Ok(Assignment { pairs, total_similarity })
}

fn word_vectors(topics: &[Topic]) -> Vec<&crate::SparseVector> {
    topics.iter().map(Topic::word_weights).collect()
}

/// Cosine distances between the word vectors of two models.
fn model_distances(m1: &TopicModel, m2: &TopicModel) -> Result<Vec<Vec<f64>>> {
    cosine_distance_matrix(&word_vectors(&m1.topics), &word_vectors(&m2.topics))
}

/// Mean cosine similarity of optimally aligned topic pairs.
pub fn model_similarity_bipartite(m1: &TopicModel, m2: &TopicModel) -> Result<f64> {
    let sim: Vec<Vec<f64>> = model_distances(m1, m2)?
        .into_iter()
        .map(|row| row.into_iter().map(|d| 1.0 - d).collect())
        .collect();
    let a = hungarian_max(&sim)?;
    Ok(a.total_similarity / m1.num_topics().min(m2.num_topics()) as f64)
}

fn unordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn mean_over_pairs<F>(n: usize, f: F) -> Result<f64>
where
    F: Fn(usize, usize) -> Result<f64> + Sync + Send,
{
    if n < 2 {
        return Err(Error::arg("stability needs at least two model instances"));
    }
    let pairs = unordered_pairs(n);
    let sims = crate::par::try_map_range(pairs.len(), |k| f(pairs[k].0, pairs[k].1))?;
    Ok(shifted_mean(&sims))
}

/// Mean computed as `x_0 + mean(x_i - x_0)`, exact when all values are equal.
fn shifted_mean(xs: &[f64]) -> f64 {
    let base = xs[0];
    base + xs.iter().map(|x| x - base).sum::<f64>() / xs.len() as f64
}

/// Average bipartite similarity over all instance pairs.
pub fn instance_stability(models: &[TopicModel]) -> Result<f64> {
    mean_over_pairs(models.len(), |i, j| model_similarity_bipartite(&models[i], &models[j]))
}

fn reftop(model: &TopicModel, refset: &ReferenceTopicSet, matcher: &dyn Matcher) -> Result<Vec<bool>> {
    matched_reference_topics(&model.topics, &refset.topics, matcher)
}

fn intersection_over_t(a: &[bool], b: &[bool], t: usize) -> f64 {
    a.iter().zip(b).filter(|(x, y)| **x && **y).count() as f64 / t as f64
}

fn check_equal_t(m1: &TopicModel, m2: &TopicModel) -> Result<usize> {
    if m1.num_topics() != m2.num_topics() {
        return Err(Error::arg(format!(
            "reference-set similarity needs equal topic counts, got {} and {}",
            m1.num_topics(),
            m2.num_topics()
        )));
    }
    Ok(m1.num_topics())
}

/// Number of reference topics matched by both models, divided by `T`.
pub fn refset_model_similarity(
    m1: &TopicModel,
    m2: &TopicModel,
    refset: &ReferenceTopicSet,
    matcher: &dyn Matcher,
) -> Result<f64> {
    let t = check_equal_t(m1, m2)?;
    Ok(intersection_over_t(&reftop(m1, refset, matcher)?, &reftop(m2, refset, matcher)?, t))
}

pub fn refset_stability(models: &[TopicModel], refset: &ReferenceTopicSet, matcher: &dyn Matcher) -> Result<f64> {
    if models.len() < 2 {
        return Err(Error::arg("stability needs at least two model instances"));
    }
    for m in &models[1..] {
        check_equal_t(&models[0], m)?;
    }
    let t = models[0].num_topics();
    let found = crate::par::try_map_range(models.len(), |i| reftop(&models[i], refset, matcher))?;
    mean_over_pairs(models.len(), |i, j| Ok(intersection_over_t(&found[i], &found[j], t)))
}

/// AuCDC of `m1`'s topics covered by `m2` averaged with the reverse
/// direction; the distance matrix is computed once for both.
pub fn aucdc_model_similarity(m1: &TopicModel, m2: &TopicModel) -> Result<f64> {
    let d = model_distances(m1, m2)?;
    let row_min: Vec<f64> = d.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let mut col_min = vec![f64::INFINITY; m2.num_topics()];
    for row in &d {
        for (c, &x) in col_min.iter_mut().zip(row) {
            *c = c.min(x);
        }
    }
    let a = crate::coverage::aucdc(&CdcCurve::from_min_distances(&row_min));
    let b = crate::coverage::aucdc(&CdcCurve::from_min_distances(&col_min));
    Ok((a + b) / 2.0)
}

pub fn aucdc_stability(models: &[TopicModel]) -> Result<f64> {
    mean_over_pairs(models.len(), |i, j| aucdc_model_similarity(&models[i], &models[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::FeatureSet;
    use crate::matcher::FnMatcher;
    use crate::sparse::SparseVector;
    use crate::topics::ModelType;
    use proptest::prelude::*;

    /// Best total over all injective row -> column maps, by enumeration.
    fn brute_force(m: &[Vec<f64>]) -> f64 {
        let (r, c) = (m.len(), m[0].len());
        if r > c {
            let t: Vec<Vec<f64>> = (0..c).map(|j| (0..r).map(|i| m[i][j]).collect()).collect();
            return brute_force(&t);
        }
        fn rec(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == m.len() {
                *best = best.max(acc);
                return;
            }
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    rec(m, row + 1, used, acc + m[row][j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(m, 0, &mut vec![false; c], 0.0, &mut best);
        best
    }

    fn unit_topic(dim: usize, i: usize) -> Topic {
        let mut w = vec![0.0; dim];
        w[i] = 1.0;
        Topic::new(SparseVector::from_dense(&w), SparseVector::from_dense(&[1.0])).unwrap()
    }

    fn model(topics: Vec<Topic>) -> TopicModel {
        TopicModel::new(topics, ModelType::External, 0).unwrap()
    }

    #[test]
    fn hungarian_examples() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let a = hungarian_max(&id).unwrap();
        assert_eq!(a.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(a.total_similarity, 3.0);

        let a = hungarian_max(&[vec![0.9, 0.8], vec![0.7, 0.1]]).unwrap();
        assert_eq!(a.pairs, vec![(0, 1), (1, 0)]);
        assert!((a.total_similarity - 1.5).abs() < 1e-15);

        assert!(hungarian_max(&[]).is_err());
        let rect = hungarian_max(&[vec![0.1, 0.9, 0.3]]).unwrap();
        assert_eq!(rect.pairs, vec![(0, 1)]);
    }

    #[test]
    fn bipartite_examples() {
        let m = model((0..4).map(|i| unit_topic(6, i)).collect());
        assert_eq!(model_similarity_bipartite(&m, &m).unwrap(), 1.0);
        let o = model((4..6).map(|i| unit_topic(6, i)).collect());
        assert_eq!(model_similarity_bipartite(&m, &o).unwrap(), 0.0);
        assert_eq!(instance_stability(&[m.clone(), m.clone(), m.clone()]).unwrap(), 1.0);
        assert_eq!(instance_stability(&[m.clone(), o.clone()]).unwrap(), 0.0);
        assert!(instance_stability(&[m]).is_err());
    }

    #[test]
    fn mean_of_three_pairwise_similarities() {
        // sims: (a,b)=1, (a,c)=0.5, (b,c)=0.5
        let a = model(vec![unit_topic(4, 0), unit_topic(4, 1)]);
        let c = model(vec![unit_topic(4, 0), unit_topic(4, 2)]);
        let s = instance_stability(&[a.clone(), a.clone(), c]).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn refset_similarity_examples() {
        // reference topics A..D on unit directions 0..3; models of T=4
        let refset = ReferenceTopicSet::new((0..4).map(|i| unit_topic(8, i)).collect());
        let zero = FnMatcher::new(FeatureSet::Full, |f: &[f64]| f.iter().all(|&x| x == 0.0));
        let m1 = model(vec![unit_topic(8, 0), unit_topic(8, 1), unit_topic(8, 5), unit_topic(8, 6)]);
        let m2 = model(vec![unit_topic(8, 1), unit_topic(8, 2), unit_topic(8, 5), unit_topic(8, 7)]);
        assert_eq!(refset_model_similarity(&m1, &m2, &refset, &zero).unwrap(), 0.25);
        assert_eq!(refset_model_similarity(&m1, &m1, &refset, &zero).unwrap(), 0.5);
        let m3 = model(vec![unit_topic(8, 3), unit_topic(8, 4), unit_topic(8, 5), unit_topic(8, 6)]);
        assert_eq!(refset_model_similarity(&m1, &m3, &refset, &zero).unwrap(), 0.0);
        let small = model(vec![unit_topic(8, 0)]);
        assert!(refset_model_similarity(&m1, &small, &refset, &zero).is_err());

        assert_eq!(refset_stability(&[m1.clone(), m1.clone(), m1.clone()], &refset, &zero).unwrap(), 0.5);
        assert_eq!(refset_stability(&[m1.clone(), m2.clone()], &refset, &zero).unwrap(), 0.25);
        let s = refset_stability(&[m1.clone(), m2.clone(), m3], &refset, &zero).unwrap();
        assert!((s - (0.25 + 0.0 + 0.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn aucdc_similarity_examples() {
        let m = model((0..3).map(|i| unit_topic(6, i)).collect());
        let o = model((3..6).map(|i| unit_topic(6, i)).collect());
        assert_eq!(aucdc_model_similarity(&m, &m).unwrap(), 0.99);
        assert_eq!(aucdc_model_similarity(&m, &o).unwrap(), 0.0);
        assert_eq!(aucdc_stability(&[m.clone(), m.clone(), m.clone()]).unwrap(), 0.99);
        let half = model(vec![unit_topic(6, 0), unit_topic(6, 4)]);
        assert_eq!(aucdc_model_similarity(&m, &half).unwrap(), aucdc_model_similarity(&half, &m).unwrap());
        assert!(aucdc_stability(&[m]).is_err());
    }

    fn random_model(seed: u64, t: usize, dim: usize) -> TopicModel {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let topics = (0..t)
            .map(|_| {
                let w: Vec<f64> = (0..dim).map(|_| if rng.random::<f64>() < 0.5 { rng.random::<f64>() } else { 0.0 }).collect();
                let mut w = w;
                w[rng.random_range(0..dim)] += 0.5;
                Topic::new(SparseVector::from_dense(&w), SparseVector::from_dense(&[1.0])).unwrap()
            })
            .collect();
        model(topics)
    }

    proptest! {
        #[test]
        fn hungarian_matches_enumeration(r in 1usize..=6, c in 1usize..=6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m: Vec<Vec<f64>> = (0..r).map(|_| (0..c).map(|_| rng.random::<f64>()).collect()).collect();
            let a = hungarian_max(&m).unwrap();
            prop_assert_eq!(a.pairs.len(), r.min(c));
            prop_assert!((a.total_similarity - brute_force(&m)).abs() < 1e-12);
        }

        #[test]
        fn similarities_are_symmetric_and_order_free(s1 in any::<u64>(), s2 in any::<u64>()) {
            let a = random_model(s1, 5, 12);
            let b = random_model(s2, 5, 12);
            let ab = model_similarity_bipartite(&a, &b).unwrap();
            prop_assert!((ab - model_similarity_bipartite(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            prop_assert_eq!(aucdc_model_similarity(&a, &b).unwrap(), aucdc_model_similarity(&b, &a).unwrap());

            let mut shuffled = b.clone();
            shuffled.topics.reverse();
            prop_assert!((ab - model_similarity_bipartite(&a, &shuffled).unwrap()).abs() < 1e-12);
            prop_assert_eq!(aucdc_model_similarity(&a, &b).unwrap(), aucdc_model_similarity(&a, &shuffled).unwrap());

            let c = random_model(s1 ^ s2, 5, 12);
            let s_abc = instance_stability(&[a.clone(), b.clone(), c.clone()]).unwrap();
            let s_cab = instance_stability(&[c.clone(), a.clone(), b.clone()]).unwrap();
            prop_assert!((s_abc - s_cab).abs() < 1e-12);
            let q_abc = aucdc_stability(&[a.clone(), b.clone(), c.clone()]).unwrap();
            let q_cab = aucdc_stability(&[c, a, b]).unwrap();
            prop_assert!((q_abc - q_cab).abs() < 1e-12);
        }
    }
}
