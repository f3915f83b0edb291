//! Dense linear algebra, symmetric eigendecomposition, RNG, Adam and
//! finite-difference gradients.

mod adam;
mod diff;
mod eig;
mod matrix;
mod rng;

pub use adam::{adam_step, AdamState};
pub use diff::finite_diff_gradient;
pub use eig::{sym_eig, sym_inv_sqrt, sym_pow, SymEig};
pub use matrix::Matrix;
pub use rng::Rng;
