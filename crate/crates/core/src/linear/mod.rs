//! Linear preprocessing and baselines: length normalization, whitening,
//! PCA, LDA (with the `λ·S_b + S_w` denominator), LDA/N, and pipelines that
//! chain them with flows.

mod fit;
mod io;
mod pipeline;
mod scatter;
mod transform;

pub use fit::{lda_fit, ldan_fit, pca_fit, whiten_fit, LAMBDA_COSINE, LAMBDA_PLDA};
pub use pipeline::{Pipeline, Stage};
pub use scatter::{compute_scatter, regularize, Scatter};
pub use transform::{apply, length_normalize, LinearTransform, TransformKind};
