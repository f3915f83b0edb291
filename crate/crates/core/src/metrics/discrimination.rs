use std::collections::BTreeMap;

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::linear::compute_scatter;
use crate::scalar::{dot, Real};

use super::{all_pairs_cosine, eer};

/// How well class means separate a labeled set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationReport {
    /// Cross-entropy with logits `⟨z, μ_c⟩`.
    pub ce_inner: f64,
    /// Cross-entropy with logits `cos(z, μ_c)`.
    pub ce_cosine: f64,
    pub between_var: f64,
    pub within_var: f64,
    pub bw_ratio: f64,
    pub train_eer_cosine: f64,
}

/// `−log softmax(logits)[target]`, computed stably.
fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[target]
}

pub fn discrimination_report<T: Real>(
    z: &VectorSet<T>,
    class_means: &BTreeMap<i64, Vec<T>>,
) -> Result<DiscriminationReport> {
    if z.is_empty() {
        return Err(Error::InsufficientData("empty probe set".into()));
    }
    let labels: Vec<i64> = class_means.keys().copied().collect();
    let means: Vec<Vec<f64>> = class_means
        .values()
        .map(|m| {
            if m.len() != z.dim() {
                return Err(Error::DimensionMismatch {
                    expected: z.dim(),
                    found: m.len(),
                });
            }
            Ok(m.iter().map(|v| v.as_f64()).collect())
        })
        .collect::<Result<_>>()?;
    let mean_norms: Vec<f64> = means.iter().map(|m| dot(m, m).sqrt()).collect();
    let position: BTreeMap<i64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let (mut ce_inner, mut ce_cosine) = (0.0, 0.0);
    let mut inner = vec![0.0; means.len()];
    let mut cosine = vec![0.0; means.len()];
    for i in 0..z.len() {
        let target = *position
            .get(&z.labels()[i])
            .ok_or(Error::MissingClass(z.labels()[i]))?;
        let x: Vec<f64> = z.vector(i).iter().map(|v| v.as_f64()).collect();
        let nx = dot(&x, &x).sqrt();
        for (c, m) in means.iter().enumerate() {
            inner[c] = dot(&x, m);
            if nx == 0.0 || mean_norms[c] == 0.0 {
                return Err(Error::ZeroNorm);
            }
            cosine[c] = inner[c] / (nx * mean_norms[c]);
        }
        ce_inner += cross_entropy(&inner, target);
        ce_cosine += cross_entropy(&cosine, target);
    }
    let n = z.len() as f64;
    let sc = compute_scatter(z)?;
    let d = z.dim() as f64;
    let between_var = sc.between.trace().as_f64() / d;
    let within_var = sc.within.trace().as_f64() / d;
    let (tg, nt) = all_pairs_cosine(z)?;
    Ok(DiscriminationReport {
        ce_inner: ce_inner / n,
        ce_cosine: ce_cosine / n,
        between_var,
        within_var,
        bw_ratio: between_var / within_var,
        train_eer_cosine: eer(&tg, &nt)?.eer,
    })
}
