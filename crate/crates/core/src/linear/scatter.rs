use log::warn;

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix, SymEig};
use crate::scalar::Real;

/// Between-class and within-class covariance with the global mean.
///
/// Both are normalized by the total sample count, so classes are weighted
/// by their size and `between + within` is the total covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatter<T> {
    pub between: Matrix<T>,
    pub within: Matrix<T>,
    pub mean: Vec<T>,
}

impl<T: Real> Scatter<T> {
    pub fn total(&self) -> Matrix<T> {
        self.between.add(&self.within)
    }
}

pub fn compute_scatter<T: Real>(set: &VectorSet<T>) -> Result<Scatter<T>> {
    let classes = set.class_indices();
    if classes.len() < 2 {
        return Err(Error::DegenerateScatter(format!(
            "between-class scatter needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    if classes.values().all(|idx| idx.len() < 2) {
        return Err(Error::DegenerateScatter(
            "within-class scatter needs a class with at least 2 samples".into(),
        ));
    }
    let d = set.dim();
    let n = T::from_count(set.len());
    let mean = set.mean();
    let means = set.class_means();
    let mut between = Matrix::zeros(d, d);
    let mut within = Matrix::zeros(d, d);
    let mut diff = vec![T::zero(); d];
    for (label, idx) in &classes {
        let m = &means[label];
        for &i in idx {
            for ((o, &x), &mu) in diff.iter_mut().zip(set.vector(i)).zip(m) {
                *o = x - mu;
            }
            add_outer(&mut within, &diff, T::one());
        }
        for ((o, &mu), &g) in diff.iter_mut().zip(m).zip(&mean) {
            *o = mu - g;
        }
        add_outer(&mut between, &diff, T::from_count(idx.len()));
    }
    let between = between.scaled(T::one() / n);
    let within = within.scaled(T::one() / n);
    Ok(Scatter {
        between,
        within,
        mean,
    })
}

fn add_outer<T: Real>(m: &mut Matrix<T>, v: &[T], w: T) {
    let d = v.len();
    for a in 0..d {
        let va = v[a] * w;
        if va == T::zero() {
            continue;
        }
        for b in a..d {
            m[(a, b)] += va * v[b];
        }
    }
    for a in 0..d {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
}

/// Adds `1e-8·trace/D·I` when the condition number exceeds `1e10`.
///
/// Returns the (possibly) regularized matrix with its eigendecomposition, or
/// an error if the matrix stays singular.
pub fn regularize<T: Real>(s: &Matrix<T>, what: &str) -> Result<(Matrix<T>, SymEig<T>)> {
    let eig = sym_eig(s)?;
    let max = eig.values.first().copied().unwrap_or_else(T::zero);
    let min = eig.values.last().copied().unwrap_or_else(T::zero);
    let ill = min <= T::zero() || max / min > T::lit(1e10);
    if !ill {
        return Ok((s.clone(), eig));
    }
    let d = T::from_count(s.rows().max(1));
    let ridge = T::lit(1e-8) * s.trace() / d;
    if !(ridge > T::zero()) {
        return Err(Error::DegenerateScatter(format!("{what} is zero")));
    }
    warn!("{what} is ill-conditioned (eigenvalues {max:e}..{min:e}); adding ridge {ridge:e}");
    let mut r = s.clone();
    r.add_diag(ridge);
    let eig = sym_eig(&r)?;
    if eig.values.last().map_or(true, |&l| l <= T::zero()) {
        return Err(Error::DegenerateScatter(format!(
            "{what} is not positive definite after regularization"
        )));
    }
    Ok((r, eig))
}
