use log::warn;

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix};
use crate::scalar::Real;

use super::scatter::{compute_scatter, regularize};
use super::{LinearTransform, TransformKind};

/// `λ` used in front of cosine scoring.
pub const LAMBDA_COSINE: f64 = 0.1;
/// `λ` used in front of PLDA.
pub const LAMBDA_PLDA: f64 = 0.0;

/// Rows `k` of the result are `scale_k · (column k of W·V)ᵀ`.
fn rows_from_columns<T: Real>(basis: &Matrix<T>, take: usize, scale: impl Fn(usize) -> T) -> Matrix<T> {
    let d = basis.rows();
    let mut out = Matrix::zeros(take, d);
    for k in 0..take {
        let s = scale(k);
        for i in 0..d {
            out[(k, i)] = basis[(i, k)] * s;
        }
    }
    out
}

fn check_out_dim(out_dim: usize, dim: usize) -> Result<usize> {
    if out_dim == 0 {
        return Err(Error::InvalidConfig("out_dim must be at least 1".into()));
    }
    if out_dim > dim {
        warn!("out_dim {out_dim} exceeds input dimension {dim}; clipping");
        return Ok(dim);
    }
    Ok(out_dim)
}

/// LDA on the pencil `(S_b, λ·S_b + S_w)`.
///
/// Rows are the leading generalized eigenvectors, normalized so that the
/// projected `λ·S_b + S_w` is the identity; with `λ = 0` the projected
/// within-class covariance is exactly `I`. Both scatters come out diagonal.
/// Dimensions past `classes − 1` are kept when requested; they carry the
/// smallest between-class variance.
pub fn lda_fit<T: Real>(set: &VectorSet<T>, out_dim: usize, lambda: T) -> Result<LinearTransform<T>> {
    if !(lambda >= T::zero()) {
        return Err(Error::InvalidConfig(format!("lambda must be non-negative, got {lambda}")));
    }
    let out_dim = check_out_dim(out_dim, set.dim())?;
    let classes = set.classes().len();
    if out_dim + 1 > classes {
        log::info!("LDA keeps {out_dim} dims with only {classes} classes");
    }
    let sc = compute_scatter(set)?;
    let denom = sc.between.scaled(lambda).add(&sc.within);
    let (_, eig) = regularize(&denom, "LDA denominator")?;
    // W = U·diag(d^{-1/2}) whitens the denominator
    let d = set.dim();
    let mut w = eig.vectors.clone();
    for k in 0..d {
        let s = T::one() / eig.values[k].sqrt();
        for i in 0..d {
            w[(i, k)] *= s;
        }
    }
    let mut m = w.transpose().matmul(&sc.between).matmul(&w);
    m.symmetrize();
    let inner = sym_eig(&m)?;
    let basis = w.matmul(&inner.vectors);
    let projection = rows_from_columns(&basis, out_dim, |_| T::one());
    LinearTransform::new(projection, sc.mean, TransformKind::Lda)
}

/// Within-class whitening `S_w^{-1/2}` with no rotation or reduction.
pub fn ldan_fit<T: Real>(set: &VectorSet<T>) -> Result<LinearTransform<T>> {
    let sc = compute_scatter(set)?;
    let (_, eig) = regularize(&sc.within, "within-class scatter")?;
    let projection = eig.reconstruct_with(|l| T::one() / l.sqrt());
    LinearTransform::new(projection, sc.mean, TransformKind::Ldan)
}

fn total_covariance<T: Real>(set: &VectorSet<T>) -> Result<(Matrix<T>, Vec<T>)> {
    if set.len() < 2 {
        return Err(Error::InsufficientData("covariance needs at least 2 vectors".into()));
    }
    let d = set.dim();
    let mean = set.mean();
    let mut cov = Matrix::zeros(d, d);
    let mut diff = vec![T::zero(); d];
    for i in 0..set.len() {
        for ((o, &x), &m) in diff.iter_mut().zip(set.vector(i)).zip(&mean) {
            *o = x - m;
        }
        for a in 0..d {
            let va = diff[a];
            let row = cov.row_mut(a);
            for b in 0..d {
                row[b] += va * diff[b];
            }
        }
    }
    Ok((cov.scaled(T::one() / T::from_count(set.len())), mean))
}

/// PCA whitening: rotate onto principal axes and rescale to unit variance.
pub fn whiten_fit<T: Real>(set: &VectorSet<T>) -> Result<LinearTransform<T>> {
    let (cov, mean) = total_covariance(set)?;
    let (_, eig) = regularize(&cov, "total covariance")?;
    let projection = rows_from_columns(&eig.vectors, set.dim(), |k| T::one() / eig.values[k].sqrt());
    LinearTransform::new(projection, mean, TransformKind::Whiten)
}

/// Leading principal components of the total covariance (unscaled rows).
pub fn pca_fit<T: Real>(set: &VectorSet<T>, out_dim: usize) -> Result<LinearTransform<T>> {
    let out_dim = check_out_dim(out_dim, set.dim())?;
    let (cov, mean) = total_covariance(set)?;
    let eig = sym_eig(&cov)?;
    let projection = rows_from_columns(&eig.vectors, out_dim, |_| T::one());
    LinearTransform::new(projection, mean, TransformKind::Pca)
}
