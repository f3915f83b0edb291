//! Discriminative normalization flow: a [`FlowStack`](crate::flow::FlowStack)
//! whose latent prior is `N(μ_y, I)` for class `y`, trained by maximum
//! likelihood together with the class means. Vanilla NF training is the same
//! objective with a single `N(0, I)` prior.

mod checkpoint;
mod loss;
mod priors;
mod trace;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use loss::{dnf_loss, nf_loss, normalize_set, set_nll, LossOutput};
pub use priors::ClassPriors;
pub use trace::{DiagnosticTrace, EpochDiagnostics, TRACE_COLUMNS};
pub use train::{train, PriorUpdate, TrainAbort, TrainConfig, TrainMode, TrainOutput};
