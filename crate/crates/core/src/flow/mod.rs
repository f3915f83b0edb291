//! Masked autoregressive flow.
//!
//! A [`FlowStack`] maps observations `x` to latent codes `z` block by block.
//! Each [`MafBlock`] permutes its input, then applies
//! `u_j = (v_j − μ_j(v_<j))·exp(−α_j(v_<j))`, and scatters the result back to
//! the original coordinate order. The normalizing direction therefore has a
//! triangular Jacobian with log-determinant `−Σ α_j`.

mod block;
mod conditioner;
mod io;
mod layer;
mod stack;

pub use block::{MafBlock, ALPHA_CLAMP};
pub use conditioner::MaskedConditioner;
pub use layer::MaskedLinear;
pub use stack::{flow_backward, FlowGradients, FlowStack, StackCache};

pub(crate) use io::{read_flow, write_flow};

#[cfg(test)]
mod tests;
