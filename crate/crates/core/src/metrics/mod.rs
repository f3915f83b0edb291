//! Cosine scoring, equal error rate, and the distribution diagnostics used to
//! judge how homogeneous, Gaussian, and discriminative a vector set is.

mod discrimination;
mod eer;
mod regulation;
mod report;
mod score;
mod subgroup;

pub use crate::data::{Trial, TrialList};
pub use discrimination::{discrimination_report, DiscriminationReport};
pub use eer::{eer, eer_from_trials, Eer};
pub use regulation::{regulation_report, RegulationReport, DEFAULT_K, DEFAULT_MIN_CLASS_SAMPLES};
pub use report::{regulation_csv, regulation_table, subgroup_csv};
pub use score::{all_pairs_cosine, cosine_score, score_trials};
pub use subgroup::{subgroup_report, SubgroupStats};
