//! Labeled vector sets, their file formats, open-set splits, trial lists and
//! a synthetic generator for irregular class-conditional data.

mod io;
mod split;
mod synth;
mod trials;
mod vectorset;

pub use io::{
    read_trials, read_vectors, read_vectors_binary, read_vectors_text, write_trials,
    write_vectors, write_vectors_binary, write_vectors_text, VectorFormat,
};
pub use split::split_open_set;
#[cfg(test)]
pub(crate) use synth::random_rotation;
pub use synth::{synth_flow_warped, synth_generate, SynthConfig};
pub use trials::{make_trials, Trial, TrialList};
pub use vectorset::VectorSet;
