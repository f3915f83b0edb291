use std::collections::BTreeMap;

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Class-conditional prior means; every class shares covariance `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPriors<T> {
    dim: usize,
    means: BTreeMap<i64, Vec<T>>,
}

impl<T: Real> ClassPriors<T> {
    pub fn new(dim: usize, means: BTreeMap<i64, Vec<T>>) -> Result<Self> {
        for m in means.values() {
            if m.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.len(),
                });
            }
            if !m.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("prior mean".into()));
            }
        }
        Ok(Self { dim, means })
    }

    /// Zero means for the given labels.
    pub fn zeros(dim: usize, labels: impl IntoIterator<Item = i64>) -> Self {
        Self {
            dim,
            means: labels.into_iter().map(|l| (l, vec![T::zero(); dim])).collect(),
        }
    }

    /// Per-class sample means of `set`.
    pub fn from_class_means(set: &VectorSet<T>) -> Self {
        Self {
            dim: set.dim(),
            means: set.class_means(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &BTreeMap<i64, Vec<T>> {
        &self.means
    }

    pub fn mean(&self, label: i64) -> Result<&[T]> {
        self.means.get(&label).map(|m| m.as_slice()).ok_or(Error::MissingPrior(label))
    }

    /// Position of `label` in ascending label order.
    pub(crate) fn position(&self, label: i64) -> Result<usize> {
        self.means
            .keys()
            .position(|&l| l == label)
            .ok_or(Error::MissingPrior(label))
    }

    /// Means concatenated in ascending label order.
    pub fn flat(&self) -> Vec<T> {
        self.means.values().flatten().copied().collect()
    }

    pub fn set_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.dim * self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim * self.means.len(),
                found: flat.len(),
            });
        }
        for (m, chunk) in self.means.values_mut().zip(flat.chunks(self.dim.max(1))) {
            m.copy_from_slice(chunk);
        }
        Ok(())
    }

    pub(crate) fn set_mean(&mut self, label: i64, mean: Vec<T>) {
        self.means.insert(label, mean);
    }
}
