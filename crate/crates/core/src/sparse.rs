//! Sparse real vectors with sorted index storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector of fixed dimension storing only its non-zero entries, sorted by
/// strictly increasing index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, indices: Vec::new(), values: Vec::new() }
    }

    /// Builds a vector from `(index, value)` pairs in any order. Zero values are
    /// dropped; duplicate indices, out-of-range indices and non-finite values
    /// are rejected.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut pairs: Vec<(u32, f64)> = pairs.into_iter().collect();
        pairs.sort_unstable_by_key(|p| p.0);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        for (k, &(i, v)) in pairs.iter().enumerate() {
            if i as usize >= dim {
                return Err(Error::arg(format!("index {i} out of range for dimension {dim}")));
            }
            if !v.is_finite() {
                return Err(Error::arg(format!("non-finite value at index {i}")));
            }
            if k > 0 && pairs[k - 1].0 == i {
                return Err(Error::arg(format!("duplicate index {i}")));
            }
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Ok(Self { dim, indices, values })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let mut indices = Vec::new();
        let mut vals = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if v != 0.0 {
                indices.push(i as u32);
                vals.push(v);
            }
        }
        Self { dim: values.len(), indices, values: vals }
    }

    /// Binary indicator of the given indices (duplicates collapse).
    pub fn indicator(dim: usize, ids: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut ids: Vec<u32> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self::from_pairs(dim, ids.into_iter().map(|i| (i, 1.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i as usize] = v;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_non_negative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        merge_join(self, other, |a, b| acc += a * b);
        acc
    }

    /// `alpha * self + beta * other`, dimensions must agree.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::arg(format!("dimension mismatch: {} vs {}", self.dim, other.dim)));
        }
        let mut pairs = Vec::with_capacity(self.nnz() + other.nnz());
        merge_union(self, other, |i, a, b| pairs.push((i, alpha * a + beta * b)));
        Self::from_pairs(self.dim, pairs)
    }
}

/// Calls `f(a_i, b_i)` for every index present in both vectors.
pub(crate) fn merge_join(a: &SparseVector, b: &SparseVector, mut f: impl FnMut(f64, f64)) {
    let (ai, av) = (&a.indices, &a.values);
    let (bi, bv) = (&b.indices, &b.values);
    let (mut i, mut j) = (0, 0);
    while i < ai.len() && j < bi.len() {
        match ai[i].cmp(&bi[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(av[i], bv[j]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Calls `f(index, a_i, b_i)` for every index present in either vector, with
/// zero standing in for the missing side.
pub(crate) fn merge_union(a: &SparseVector, b: &SparseVector, mut f: impl FnMut(u32, f64, f64)) {
    let (ai, av) = (&a.indices, &a.values);
    let (bi, bv) = (&b.indices, &b.values);
    let (mut i, mut j) = (0, 0);
    while i < ai.len() || j < bi.len() {
        if j >= bi.len() || (i < ai.len() && ai[i] < bi[j]) {
            f(ai[i], av[i], 0.0);
            i += 1;
        } else if i >= ai.len() || bi[j] < ai[i] {
            f(bi[j], 0.0, bv[j]);
            j += 1;
        } else {
            f(ai[i], av[i], bv[j]);
            i += 1;
            j += 1;
        }
    }
}
