use rayon::prelude::*;

use crate::data::{TrialList, VectorSet};
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

/// `⟨e,t⟩ / (‖e‖‖t‖)`, clamped to `[-1, 1]`.
pub fn cosine_score<T: Real>(e: &[T], t: &[T]) -> Result<T> {
    if e.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: t.len(),
        });
    }
    let ne = dot(e, e).sqrt();
    let nt = dot(t, t).sqrt();
    if ne == T::zero() || nt == T::zero() {
        return Err(Error::ZeroNorm);
    }
    let c = dot(e, t) / (ne * nt);
    Ok(c.max(-T::one()).min(T::one()))
}

/// Scores every trial with `score(enroll, test)`; ids are resolved in `set`.
pub fn score_trials<T: Real>(
    set: &VectorSet<T>,
    trials: &TrialList,
    score: impl Fn(&[T], &[T]) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let index = set.id_index();
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::InsufficientData(format!("trial id `{id}` not in vector set")))
    };
    let pairs: Vec<(usize, usize)> = trials
        .trials
        .iter()
        .map(|t| Ok((lookup(&t.enroll)?, lookup(&t.test)?)))
        .collect::<Result<_>>()?;
    pairs
        .par_iter()
        .map(|&(e, t)| score(set.vector(e), set.vector(t)))
        .collect()
}

/// Cosine scores of all unordered pairs `i < j`, split into same-class
/// (target) and cross-class (nontarget) lists, in pair order.
pub fn all_pairs_cosine<T: Real>(set: &VectorSet<T>) -> Result<(Vec<T>, Vec<T>)> {
    let n = set.len();
    let unit: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let v = set.vector(i);
            let nv = dot(v, v).sqrt();
            if nv == T::zero() {
                return Err(Error::ZeroNorm);
            }
            Ok(v.iter().map(|&x| x / nv).collect())
        })
        .collect::<Result<_>>()?;
    let labels = set.labels();
    let rows: Vec<(Vec<T>, Vec<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut tg = Vec::new();
            let mut nt = Vec::new();
            for j in i + 1..n {
                let c = dot(&unit[i], &unit[j]).max(-T::one()).min(T::one());
                if labels[i] == labels[j] {
                    tg.push(c);
                } else {
                    nt.push(c);
                }
            }
            (tg, nt)
        })
        .collect();
    let mut targets = Vec::new();
    let mut nontargets = Vec::new();
    for (tg, nt) in rows {
        targets.extend(tg);
        nontargets.extend(nt);
    }
    Ok((targets, nontargets))
}
