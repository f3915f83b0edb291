use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::scalar::Real;

use super::block::BlockCache;
use super::{MafBlock, MaskedConditioner};

/// Ordered composition of MAF blocks.
///
/// Block `i` reads its input in natural order for even `i` and reversed
/// order for odd `i`, so consecutive blocks condition in opposite directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowStack<T> {
    dim: usize,
    blocks: Vec<MafBlock<T>>,
}

/// Intermediates of a normalizing pass, consumed by the backward pass.
#[derive(Debug, Clone)]
pub struct StackCache<T> {
    pub(crate) blocks: Vec<BlockCache<T>>,
    pub z: Vec<T>,
    pub logdet: T,
}

/// Result of [`flow_backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGradients<T> {
    /// Flat parameter gradient in [`FlowStack::params`] order.
    pub params: Vec<T>,
    /// Gradient with respect to the input vector.
    pub input: Vec<T>,
}

fn block_permutation(index: usize, dim: usize) -> Vec<usize> {
    if index % 2 == 0 {
        (0..dim).collect()
    } else {
        (0..dim).rev().collect()
    }
}

impl<T: Real> FlowStack<T> {
    /// Identity-initialized stack: hidden weights random, output heads zero.
    pub fn new(dim: usize, num_blocks: usize, hidden: [usize; 3], rng: &mut Rng) -> Result<Self> {
        Self::build(dim, num_blocks, hidden, T::zero(), rng)
    }

    /// Stack with hidden widths `(D, D, D)`.
    pub fn with_default_widths(dim: usize, num_blocks: usize, rng: &mut Rng) -> Result<Self> {
        Self::new(dim, num_blocks, [dim, dim, dim], rng)
    }

    /// Stack with random output heads of standard deviation `head_scale / √fan_in`.
    ///
    /// Panics if `dim` is zero.
    pub fn random(dim: usize, num_blocks: usize, head_scale: T, rng: &mut Rng) -> Self {
        Self::build(dim, num_blocks, [dim, dim, dim], head_scale, rng)
            .expect("random flow with positive dimension")
    }

    fn build(dim: usize, num_blocks: usize, hidden: [usize; 3], head_scale: T, rng: &mut Rng) -> Result<Self> {
        let mut blocks = Vec::with_capacity(num_blocks);
        for i in 0..num_blocks {
            let mut cond = MaskedConditioner::zeros(dim, hidden)?;
            cond.init(head_scale, rng);
            blocks.push(MafBlock::new(cond, block_permutation(i, dim))?);
        }
        Ok(Self { dim, blocks })
    }

    pub fn from_blocks(dim: usize, blocks: Vec<MafBlock<T>>) -> Result<Self> {
        for b in &blocks {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.dim(),
                });
            }
        }
        Ok(Self { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[MafBlock<T>] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [MafBlock<T>] {
        &mut self.blocks
    }

    pub fn num_params(&self) -> usize {
        self.blocks.iter().map(|b| b.conditioner.num_params()).sum()
    }

    pub fn params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.num_params());
        for b in &self.blocks {
            b.conditioner.write_params(&mut out);
        }
        out
    }

    pub fn set_params(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        let mut off = 0;
        for b in &mut self.blocks {
            off += b.conditioner.read_params(&params[off..]);
        }
        Ok(())
    }

    /// Location of flat parameter `index`, e.g. `block[2].hidden1.weight[3,0]`.
    pub fn param_path(&self, mut index: usize) -> String {
        for (i, b) in self.blocks.iter().enumerate() {
            let n = b.conditioner.num_params();
            if index < n {
                return format!("block[{i}].{}", b.conditioner.param_name(index));
            }
            index -= n;
        }
        format!("prior_means[{index}]")
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("flow input".into()));
        }
        Ok(())
    }

    /// `z = f⁻¹(x)` and `ln|det ∂f⁻¹(x)/∂x|`.
    pub fn normalize(&self, x: &[T]) -> Result<(Vec<T>, T)> {
        self.check_input(x)?;
        let mut u = x.to_vec();
        let mut logdet = T::zero();
        for (i, b) in self.blocks.iter().enumerate() {
            let (out, ld) = b.normalize(&u, i)?;
            u = out;
            logdet += ld;
        }
        Ok((u, logdet))
    }

    /// Normalizing pass that keeps every block's intermediates.
    pub fn normalize_cached(&self, x: &[T]) -> Result<StackCache<T>> {
        self.check_input(x)?;
        let mut u = x.to_vec();
        let mut logdet = T::zero();
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            let (out, ld, cache) = b.normalize_cached(&u, i)?;
            u = out;
            logdet += ld;
            blocks.push(cache);
        }
        Ok(StackCache {
            blocks,
            z: u,
            logdet,
        })
    }

    /// Per-block intermediates `z_0 = x, z_1, …, z_T = z` and block log-dets.
    pub fn trajectory(&self, x: &[T]) -> Result<(Vec<Vec<T>>, Vec<T>)> {
        self.check_input(x)?;
        let mut states = vec![x.to_vec()];
        let mut logdets = Vec::with_capacity(self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            let (out, ld) = b.normalize(states.last().unwrap(), i)?;
            states.push(out);
            logdets.push(ld);
        }
        Ok((states, logdets))
    }

    /// `x = f(z)`: blocks inverted in reverse order.
    pub fn generate(&self, z: &[T]) -> Result<Vec<T>> {
        self.check_input(z)?;
        let mut u = z.to_vec();
        for (i, b) in self.blocks.iter().enumerate().rev() {
            u = b.generate(&u, i)?;
        }
        Ok(u)
    }

    /// Accumulates parameter gradients of `⟨dz, z⟩ + dlogdet·logdet` into
    /// `grad` and returns the gradient with respect to `x`.
    pub fn backward_into(&self, cache: &StackCache<T>, dz: &[T], dlogdet: T, grad: &mut [T]) -> Vec<T> {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut off = 0;
        for b in &self.blocks {
            offsets.push(off);
            off += b.conditioner.num_params();
        }
        let mut g = dz.to_vec();
        for (i, b) in self.blocks.iter().enumerate().rev() {
            let n = b.conditioner.num_params();
            g = b.backward(&cache.blocks[i], &g, dlogdet, &mut grad[offsets[i]..offsets[i] + n]);
        }
        g
    }
}

/// Exact gradients of `L = ⟨dz, z⟩ + dlogdet·logdet` at `x`.
pub fn flow_backward<T: Real>(
    stack: &FlowStack<T>,
    x: &[T],
    upstream_dz: &[T],
    upstream_dlogdet: T,
) -> Result<FlowGradients<T>> {
    if upstream_dz.len() != stack.dim() {
        return Err(Error::DimensionMismatch {
            expected: stack.dim(),
            found: upstream_dz.len(),
        });
    }
    let cache = stack.normalize_cached(x)?;
    let mut params = vec![T::zero(); stack.num_params()];
    let input = stack.backward_into(&cache, upstream_dz, upstream_dlogdet, &mut params);
    if let Some(index) = params.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient {
            index,
            path: Some(stack.param_path(index)),
        });
    }
    if !input.iter().all(|g| g.is_finite()) {
        return Err(Error::NonFinite("input gradient".into()));
    }
    Ok(FlowGradients { params, input })
}
