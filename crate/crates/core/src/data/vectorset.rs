use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Real;

/// Labeled embedding vectors with unique utterance ids.
///
/// Vectors are stored as the rows of an `n × dim` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet<T> {
    ids: Vec<String>,
    labels: Vec<i64>,
    vectors: Matrix<T>,
}

impl<T: Real> VectorSet<T> {
    pub fn new(ids: Vec<String>, labels: Vec<i64>, vectors: Matrix<T>) -> Result<Self> {
        let n = vectors.rows();
        if ids.len() != n || labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if ids.len() != n { ids.len() } else { labels.len() },
            });
        }
        let mut seen = HashSet::with_capacity(n);
        for id in &ids {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!(
                    "utterance id {id:?} is empty or contains whitespace"
                )));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate utterance id {id:?}")));
            }
        }
        if !vectors.is_finite() {
            return Err(Error::NonFinite("vector set contains non-finite entries".into()));
        }
        Ok(Self {
            ids,
            labels,
            vectors,
        })
    }

    /// Empty set of the given dimension.
    pub fn empty(dim: usize) -> Self {
        Self {
            ids: Vec::new(),
            labels: Vec::new(),
            vectors: Matrix::zeros(0, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn vectors(&self) -> &Matrix<T> {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[T] {
        self.vectors.row(i)
    }

    /// Sorted distinct class labels.
    pub fn classes(&self) -> Vec<i64> {
        let mut c: Vec<i64> = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Record indices per class, classes in ascending label order.
    pub fn class_indices(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, &l) in self.labels.iter().enumerate() {
            map.entry(l).or_default().push(i);
        }
        map
    }

    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }

    /// Records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let dim = self.dim();
        let mut data = Vec::with_capacity(indices.len() * dim);
        for &i in indices {
            data.extend_from_slice(self.vector(i));
        }
        Self {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            vectors: Matrix::from_vec(indices.len(), dim, data).expect("subset shape"),
        }
    }

    /// Same ids and labels with replacement vectors (any dimension).
    pub fn with_vectors(&self, vectors: Matrix<T>) -> Result<Self> {
        if vectors.rows() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: vectors.rows(),
            });
        }
        if !vectors.is_finite() {
            return Err(Error::NonFinite("transformed vectors".into()));
        }
        Ok(Self {
            ids: self.ids.clone(),
            labels: self.labels.clone(),
            vectors,
        })
    }

    /// Applies `f` to every vector; `f` must return vectors of length `out_dim`.
    pub fn try_map(
        &self,
        out_dim: usize,
        mut f: impl FnMut(&[T]) -> Result<Vec<T>>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(self.len() * out_dim);
        for i in 0..self.len() {
            let y = f(self.vector(i))?;
            if y.len() != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    found: y.len(),
                });
            }
            data.extend(y);
        }
        self.with_vectors(Matrix::from_vec(self.len(), out_dim, data)?)
    }

    /// Parallel [`Self::try_map`]; output order matches input order.
    pub fn par_try_map(
        &self,
        out_dim: usize,
        f: impl Fn(&[T]) -> Result<Vec<T>> + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let rows: Vec<Vec<T>> = (0..self.len())
            .into_par_iter()
            .map(|i| f(self.vector(i)))
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(self.len() * out_dim);
        for y in rows {
            if y.len() != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    found: y.len(),
                });
            }
            data.extend(y);
        }
        self.with_vectors(Matrix::from_vec(self.len(), out_dim, data)?)
    }

    /// Keeps the contiguous coordinate range `start..end`.
    pub fn select_dims(&self, start: usize, end: usize) -> Self {
        let width = end - start;
        let mut data = Vec::with_capacity(self.len() * width);
        for i in 0..self.len() {
            data.extend_from_slice(&self.vector(i)[start..end]);
        }
        Self {
            ids: self.ids.clone(),
            labels: self.labels.clone(),
            vectors: Matrix::from_vec(self.len(), width, data).expect("dims shape"),
        }
    }

    pub fn mean(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.dim()];
        for i in 0..self.len() {
            for (a, &x) in m.iter_mut().zip(self.vector(i)) {
                *a += x;
            }
        }
        let n = T::from_count(self.len().max(1));
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Per-class mean vectors, ascending label order.
    pub fn class_means(&self) -> BTreeMap<i64, Vec<T>> {
        self.class_indices()
            .into_iter()
            .map(|(label, idx)| {
                let mut m = vec![T::zero(); self.dim()];
                for &i in &idx {
                    for (a, &x) in m.iter_mut().zip(self.vector(i)) {
                        *a += x;
                    }
                }
                let n = T::from_count(idx.len());
                m.iter_mut().for_each(|a| *a /= n);
                (label, m)
            })
            .collect()
    }

    pub fn cast<U: Real>(&self) -> VectorSet<U> {
        VectorSet {
            ids: self.ids.clone(),
            labels: self.labels.clone(),
            vectors: self.vectors.cast(),
        }
    }
}
