use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::scalar::Real;

use super::VectorSet;

/// Class-disjoint split: each class lands wholly in train or in eval.
///
/// `round(train_fraction · classes)` randomly chosen classes go to train.
/// Record order within each side follows the input.
pub fn split_open_set<T: Real>(
    set: &VectorSet<T>,
    train_fraction: f64,
    seed: u64,
) -> Result<(VectorSet<T>, VectorSet<T>)> {
    let mut classes = set.classes();
    let k = classes.len();
    if k < 4 {
        return Err(Error::InsufficientData(format!(
            "open-set split needs at least 4 classes, found {k}"
        )));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_fraction} outside [0, 1]"
        )));
    }
    let n_train = (train_fraction * k as f64).round() as usize;
    if n_train == 0 || n_train == k {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_fraction} leaves one side of the split empty"
        )));
    }
    Rng::new(seed).shuffle(&mut classes);
    let train_classes: HashSet<i64> = classes[..n_train].iter().copied().collect();
    let (train_idx, eval_idx): (Vec<usize>, Vec<usize>) =
        (0..set.len()).partition(|&i| train_classes.contains(&set.labels()[i]));
    Ok((set.subset(&train_idx), set.subset(&eval_idx)))
}
