//! Discriminative normalization flows for embedding vectors.
//!
//! The crate provides a masked autoregressive flow ([`flow`]) trained either
//! as a plain density model or with class-conditional Gaussian priors
//! ([`dnf`]), the linear back-ends it is compared against ([`linear`]),
//! two-covariance PLDA scoring ([`plda`]), EER and distribution diagnostics
//! ([`metrics`]), and vector-set I/O plus a synthetic generator ([`data`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below name the double-precision instantiations used by the CLI.

pub mod data;
pub mod dnf;
pub mod error;
pub mod flow;
mod io_util;
pub mod linear;
pub mod metrics;
pub mod numerics;
pub mod plda;
pub mod scalar;

pub use error::{Error, ErrorClass, Result};
pub use io_util::write_atomic;
pub use scalar::Real;

pub type Matrix64 = numerics::Matrix<f64>;
pub type VectorSet64 = data::VectorSet<f64>;
pub type FlowStack64 = flow::FlowStack<f64>;
pub type ClassPriors64 = dnf::ClassPriors<f64>;
pub type LinearTransform64 = linear::LinearTransform<f64>;
pub type Pipeline64 = linear::Pipeline<f64>;
pub type PldaModel64 = plda::PldaModel<f64>;

pub type Matrix32 = numerics::Matrix<f32>;
pub type VectorSet32 = data::VectorSet<f32>;
pub type FlowStack32 = flow::FlowStack<f32>;

/// Crate version plus the container magics this build reads and writes.
pub const FORMAT_MAGICS: [&str; 5] = ["VEC1", "DNF1", "PRI1", "LIN1", "PLD1"];
