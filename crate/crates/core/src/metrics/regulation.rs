use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::linear::compute_scatter;
use crate::numerics::{sym_eig, Matrix};
use crate::scalar::{dot, Real};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_MIN_CLASS_SAMPLES: usize = 100;

/// Homogeneity and Gaussianality statistics of a labeled set.
///
/// Per-PC lists have `min(k, D)` entries. Kurtosis is excess kurtosis.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulationReport {
    pub pc_dir_var: Vec<f64>,
    pub avg_pc_dir_var: f64,
    pub pc_shape_var: Vec<f64>,
    pub pc_shape_var_avg: f64,
    pub avg_kurtosis: f64,
    pub avg_abs_kurtosis: f64,
    /// Mean of absolute per-class skewness.
    pub avg_skewness: f64,
    pub skewness_signed: f64,
    pub between_var: f64,
    pub within_var: f64,
    pub k: usize,
    pub min_class_samples: usize,
    pub classes_used: usize,
}

struct ClassStats {
    values: Vec<f64>,
    /// Leading eigenvectors, one per PC.
    vectors: Vec<Vec<f64>>,
    /// Centered projections on each leading PC.
    projections: Vec<Vec<f64>>,
}

fn class_stats(set: &VectorSet<f64>, idx: &[usize], k: usize) -> Result<ClassStats> {
    let d = set.dim();
    let n = idx.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in idx {
        for (m, &x) in mean.iter_mut().zip(set.vector(i)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let centered: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| set.vector(i).iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = Matrix::zeros(d, d);
    for c in &centered {
        for a in 0..d {
            for b in a..d {
                cov[(a, b)] += c[a] * c[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[(a, b)] /= n;
            cov[(b, a)] = cov[(a, b)];
        }
    }
    let eig = sym_eig(&cov)?;
    let vectors: Vec<Vec<f64>> = (0..k).map(|m| eig.vector(m)).collect();
    let projections = vectors
        .iter()
        .map(|v| centered.iter().map(|c| dot(c, v)).collect())
        .collect();
    Ok(ClassStats {
        values: eig.values[..k].to_vec(),
        vectors,
        projections,
    })
}

fn population_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n
}

/// Flips each direction to agree with the running mean direction until the
/// signs stop changing. Returns the unit mean direction.
fn align_signs(dirs: &mut [Vec<f64>]) -> Vec<f64> {
    let d = dirs[0].len();
    let mut reference = dirs[0].clone();
    for _ in 0..50 {
        let mut flipped = false;
        for v in dirs.iter_mut() {
            if dot(v, &reference) < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
                flipped = true;
            }
        }
        let mut mean = vec![0.0; d];
        for v in dirs.iter() {
            for (m, &x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        let norm = dot(&mean, &mean).sqrt();
        if norm > 0.0 {
            mean.iter_mut().for_each(|m| *m /= norm);
            reference = mean;
        }
        if !flipped {
            break;
        }
    }
    reference
}

/// Skewness and excess kurtosis of already centered values; 0 for constants.
fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let c = x - m;
        let c2 = c * c;
        m2 += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return (0.0, 0.0);
    }
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Regulation statistics over classes with at least `min_class_samples`
/// samples, using their first `k` principal components.
pub fn regulation_report<T: Real>(
    set: &VectorSet<T>,
    k: usize,
    min_class_samples: usize,
) -> Result<RegulationReport> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let set: VectorSet<f64> = set.cast();
    let k_eff = k.min(set.dim());
    let classes: Vec<Vec<usize>> = set
        .class_indices()
        .into_values()
        .filter(|idx| idx.len() >= min_class_samples.max(2))
        .collect();
    if classes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "regulation report needs 2 classes with at least {min_class_samples} samples, found {}",
            classes.len()
        )));
    }
    let stats: Vec<ClassStats> = classes
        .iter()
        .map(|idx| class_stats(&set, idx, k_eff))
        .collect::<Result<_>>()?;

    let mut pc_dir_var = Vec::with_capacity(k_eff);
    let mut pc_shape_var = Vec::with_capacity(k_eff);
    let (mut kurt, mut abs_kurt, mut skew, mut abs_skew) = (0.0, 0.0, 0.0, 0.0);
    let nc = stats.len() as f64;
    for m in 0..k_eff {
        let mut dirs: Vec<Vec<f64>> = stats.iter().map(|s| s.vectors[m].clone()).collect();
        let mean_dir = align_signs(&mut dirs);
        let cosines: Vec<f64> = dirs.iter().map(|v| dot(v, &mean_dir)).collect();
        pc_dir_var.push(population_variance(&cosines));
        let values: Vec<f64> = stats.iter().map(|s| s.values[m]).collect();
        pc_shape_var.push(population_variance(&values));
        let (mut pk, mut pak, mut ps, mut pas) = (0.0, 0.0, 0.0, 0.0);
        for (s, v) in stats.iter().zip(&dirs) {
            let (mut sk, ku) = moments(&s.projections[m]);
            // skew sign follows the aligned direction
            if dot(v, &s.vectors[m]) < 0.0 {
                sk = -sk;
            }
            pk += ku;
            pak += ku.abs();
            ps += sk;
            pas += sk.abs();
        }
        kurt += pk / nc;
        abs_kurt += pak / nc;
        skew += ps / nc;
        abs_skew += pas / nc;
    }
    let kf = k_eff as f64;
    let sc = compute_scatter(&set)?;
    let d = set.dim() as f64;
    Ok(RegulationReport {
        avg_pc_dir_var: pc_dir_var.iter().sum::<f64>() / kf,
        pc_dir_var,
        pc_shape_var_avg: pc_shape_var.iter().sum::<f64>() / kf,
        pc_shape_var,
        avg_kurtosis: kurt / kf,
        avg_abs_kurtosis: abs_kurt / kf,
        avg_skewness: abs_skew / kf,
        skewness_signed: skew / kf,
        between_var: sc.between.trace() / d,
        within_var: sc.within.trace() / d,
        k: k_eff,
        min_class_samples,
        classes_used: stats.len(),
    })
}
