use crate::error::{Error, Result};
use crate::scalar::Real;

use super::fit::Basis;
use super::PldaModel;

/// Precomputed scoring frame of a [`PldaModel`].
///
/// Vectors are mapped once with [`PldaScorer::project`]; in that frame both
/// covariances are diagonal and the log-likelihood ratio splits into a sum of
/// independent 2-D Gaussian terms.
#[derive(Debug, Clone)]
pub struct PldaScorer<T> {
    mean: Vec<T>,
    t: crate::numerics::Matrix<T>,
    /// Per-dim constant, `(e²+t²)` coefficient, and `e·t` coefficient.
    c0: Vec<T>,
    c_sq: Vec<T>,
    c_cross: Vec<T>,
}

impl<T: Real> PldaScorer<T> {
    pub fn new(model: &PldaModel<T>) -> Result<Self> {
        let d = model.dim();
        if model.sigma_b.rows() != d || model.sigma_w.rows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: model.sigma_b.rows().max(model.sigma_w.rows()),
            });
        }
        let basis = Basis::new(&model.sigma_b, &model.sigma_w)?;
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let mut c0 = Vec::with_capacity(d);
        let mut c_sq = Vec::with_capacity(d);
        let mut c_cross = Vec::with_capacity(d);
        for &l in &basis.lambda {
            // same-class covariance [[a, b], [b, a]] versus diag(a, a)
            let a = l + T::one();
            let det = two * l + T::one();
            c0.push(a.ln() - half * det.ln());
            c_sq.push(T::one() / (two * a) - a / (two * det));
            c_cross.push(l / det);
        }
        Ok(Self {
            mean: model.mean.clone(),
            t: basis.t,
            c0,
            c_sq,
            c_cross,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("PLDA input vector".into()));
        }
        let centered: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &m)| a - m).collect();
        Ok(self.t.matvec(&centered))
    }

    /// Log-likelihood ratio of two projected vectors; symmetric bit-for-bit.
    pub fn score_projected(&self, e: &[T], t: &[T]) -> T {
        let mut s = T::zero();
        for k in 0..e.len() {
            let sq = e[k] * e[k] + t[k] * t[k];
            s += self.c0[k] + self.c_sq[k] * sq + self.c_cross[k] * (e[k] * t[k]);
        }
        s
    }

    pub fn score(&self, e: &[T], t: &[T]) -> Result<T> {
        Ok(self.score_projected(&self.project(e)?, &self.project(t)?))
    }
}

/// `ln p(e,t | same class) − ln p(e,t | different classes)`.
pub fn plda_score<T: Real>(model: &PldaModel<T>, e: &[T], t: &[T]) -> Result<T> {
    PldaScorer::new(model)?.score(e, t)
}
