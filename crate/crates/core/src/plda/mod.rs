//! Two-covariance PLDA: `x = m + b + w` with `b ~ N(0, Σ_b)` shared by a
//! class and `w ~ N(0, Σ_w)` per sample. Fitted by EM and scored with the
//! closed-form same-class versus different-class log-likelihood ratio.

mod fit;
mod io;
mod score;

pub use fit::{plda_fit, plda_fit_with, PldaConfig, PldaFit};
pub use io::{read_scores, write_scores, ScoreLine};
pub use score::{plda_score, PldaScorer};

use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct PldaModel<T> {
    pub mean: Vec<T>,
    pub sigma_b: Matrix<T>,
    pub sigma_w: Matrix<T>,
}

impl<T> PldaModel<T> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}
