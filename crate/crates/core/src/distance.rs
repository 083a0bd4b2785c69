//! Base distance measures between topic vectors.
//!
//! All functions iterate over the union of the supports of their sparse
//! arguments, so the cost is linear in the number of non-zeros.

use crate::error::{Error, Result};
use crate::sparse::{merge_union, SparseVector};

/// Tolerance used when checking that a vector sums to one.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// A non-negative vector summing to one, or the all-zero degenerate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector(SparseVector);

impl DistributionVector {
    pub fn is_degenerate(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_sparse(&self) -> &SparseVector {
        &self.0
    }

    pub fn into_sparse(self) -> SparseVector {
        self.0
    }

    /// Wraps a vector that is already a probability distribution.
    pub fn from_probabilities(v: SparseVector) -> Result<Self> {
        if !v.is_non_negative() {
            return Err(Error::arg("distribution has a negative component"));
        }
        let s = v.sum();
        if !v.is_zero() && (s - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::arg(format!("distribution sums to {s}, expected 1")));
        }
        Ok(Self(v))
    }
}

/// Divides every component by the total; the zero vector maps to the
/// degenerate distribution.
pub fn normalize_to_distribution(v: &SparseVector) -> Result<DistributionVector> {
    if !v.is_non_negative() {
        return Err(Error::arg("cannot normalize a vector with negative components"));
    }
    let s = v.sum();
    if s == 0.0 {
        return Ok(DistributionVector(SparseVector::zeros(v.dim())));
    }
    Ok(DistributionVector(v.scaled(1.0 / s)))
}

fn check_dims(a: &SparseVector, b: &SparseVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::arg(format!("length mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `1 - a·b / (|a| |b|)`, clamped to `[0, 1]` (exact for non-negative inputs
/// up to rounding).
pub fn cosine_distance(a: &SparseVector, b: &SparseVector) -> Result<f64> {
    check_dims(a, b)?;
    let (sa, sb) = (a.dot(a), b.dot(b));
    if sa == 0.0 || sb == 0.0 {
        return Err(Error::arg("cosine distance of a zero vector"));
    }
    Ok(cosine_distance_with_sq_norms(a, sa, b, sb))
}

/// Cosine distance with precomputed, non-zero squared Euclidean norms.
///
/// The denominator is `sqrt(|a|^2 |b|^2)`, which makes the distance of a
/// vector to itself exactly zero.
pub fn cosine_distance_with_sq_norms(a: &SparseVector, sq_norm_a: f64, b: &SparseVector, sq_norm_b: f64) -> f64 {
    let sim = a.dot(b) / (sq_norm_a * sq_norm_b).sqrt();
    (1.0 - sim).clamp(0.0, 1.0)
}

/// Hellinger distance with the `1/sqrt(2)` constant, so the range is `[0, 1]`.
pub fn hellinger_distance(p: &DistributionVector, q: &DistributionVector) -> Result<f64> {
    check_dims(&p.0, &q.0)?;
    if p.is_degenerate() || q.is_degenerate() {
        return Err(Error::arg("hellinger distance of a degenerate distribution"));
    }
    let mut acc = 0.0;
    merge_union(&p.0, &q.0, |_, a, b| {
        let d = a.sqrt() - b.sqrt();
        acc += d * d;
    });
    Ok((acc.sqrt() / std::f64::consts::SQRT_2).min(1.0))
}

pub fn l1_distance(p: &SparseVector, q: &SparseVector) -> Result<f64> {
    check_dims(p, q)?;
    let mut acc = 0.0;
    merge_union(p, q, |_, a, b| acc += (a - b).abs());
    Ok(acc)
}

pub fn l2_distance(p: &SparseVector, q: &SparseVector) -> Result<f64> {
    check_dims(p, q)?;
    let mut acc = 0.0;
    merge_union(p, q, |_, a, b| {
        let d = a - b;
        acc += d * d;
    });
    Ok(acc.sqrt())
}

/// Cosine similarity `a·b / (|a||b|)` of two non-zero vectors.
pub fn cosine_similarity(a: &SparseVector, b: &SparseVector) -> Result<f64> {
    Ok(1.0 - cosine_distance(a, b)?)
}

/// Cosine distances between every row of `rows` and every column of `cols`,
/// stored row-major. Norms are computed once per vector.
///
/// Dot products go through an inverted index over the columns, so each row
/// only touches columns that share a word with it. Terms are accumulated in
/// ascending word order, the same order as [`SparseVector::dot`].
pub fn cosine_distance_matrix(rows: &[&SparseVector], cols: &[&SparseVector]) -> Result<Vec<Vec<f64>>> {
    let row_norms = nonzero_sq_norms(rows, "row")?;
    let col_norms = nonzero_sq_norms(cols, "column")?;
    let Some(first) = rows.first().or(cols.first()) else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    if rows.iter().chain(cols.iter()).any(|v| v.dim() != dim) {
        return Err(Error::arg("vectors of different dimensions in distance matrix"));
    }
    let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
    for (c, v) in cols.iter().enumerate() {
        for (w, x) in v.iter() {
            postings[w as usize].push((c as u32, x));
        }
    }
    Ok(crate::par::map_range(rows.len(), |i| {
        let mut dots = vec![0.0; cols.len()];
        for (w, a) in rows[i].iter() {
            for &(c, b) in &postings[w as usize] {
                dots[c as usize] += a * b;
            }
        }
        dots.iter()
            .zip(&col_norms)
            .map(|(&dot, &nc)| (1.0 - dot / (row_norms[i] * nc).sqrt()).clamp(0.0, 1.0))
            .collect()
    }))
}

fn nonzero_sq_norms(vs: &[&SparseVector], side: &str) -> Result<Vec<f64>> {
    vs.iter()
        .enumerate()
        .map(|(i, v)| {
            let n = v.dot(v);
            if n == 0.0 {
                Err(Error::arg(format!("{side} vector {i} is all-zero")))
            } else {
                Ok(n)
            }
        })
        .collect()
}
