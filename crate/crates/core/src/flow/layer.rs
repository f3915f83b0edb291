use crate::numerics::Rng;
use crate::scalar::Real;

/// Fully connected layer whose row `r` only reads the first `fan[r]` inputs.
///
/// MADE-style masks reduce to prefixes once units are sorted by degree, so
/// masked weights are never read and always receive zero gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedLinear<T> {
    pub(crate) out_dim: usize,
    pub(crate) in_dim: usize,
    pub(crate) weight: Vec<T>,
    pub(crate) bias: Vec<T>,
    pub(crate) fan: Vec<usize>,
}

impl<T: Real> MaskedLinear<T> {
    pub fn zeros(in_dim: usize, fan: Vec<usize>) -> Self {
        let out_dim = fan.len();
        debug_assert!(fan.iter().all(|&f| f <= in_dim));
        Self {
            out_dim,
            in_dim,
            weight: vec![T::zero(); out_dim * in_dim],
            bias: vec![T::zero(); out_dim],
            fan,
        }
    }

    /// Allowed weights drawn from `N(0, scale²/fan_in)`.
    pub(crate) fn init_weights(&mut self, scale: T, rng: &mut Rng) {
        for r in 0..self.out_dim {
            let f = self.fan[r];
            if f == 0 {
                continue;
            }
            let sd = scale / T::from_count(f).sqrt();
            for c in 0..f {
                self.weight[r * self.in_dim + c] = rng.normal::<T>() * sd;
            }
        }
    }

    pub(crate) fn init_bias(&mut self, sd: T, rng: &mut Rng) {
        for b in &mut self.bias {
            *b = rng.normal::<T>() * sd;
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn fan(&self) -> &[usize] {
        &self.fan
    }

    pub fn weights(&self) -> &[T] {
        &self.weight
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    /// Weight of row `r`, column `c`; masked positions are never read.
    pub fn weight_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.weight[r * self.in_dim + c]
    }

    pub fn num_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn forward(&self, x: &[T], y: &mut [T]) {
        for r in 0..self.out_dim {
            let row = &self.weight[r * self.in_dim..r * self.in_dim + self.fan[r]];
            let mut acc = self.bias[r];
            for (&w, &xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            y[r] = acc;
        }
    }

    /// Accumulates parameter gradients into `grad` (weights then biases) and
    /// the input gradient into `dx`.
    pub fn backward(&self, x: &[T], dy: &[T], dx: &mut [T], grad: &mut [T]) {
        let (gw, gb) = grad.split_at_mut(self.weight.len());
        for r in 0..self.out_dim {
            let g = dy[r];
            if g == T::zero() {
                continue;
            }
            gb[r] += g;
            let base = r * self.in_dim;
            let f = self.fan[r];
            let row = &self.weight[base..base + f];
            let grow = &mut gw[base..base + f];
            for c in 0..f {
                grow[c] += g * x[c];
                dx[c] += g * row[c];
            }
        }
    }

    pub(crate) fn write_params(&self, out: &mut Vec<T>) {
        out.extend_from_slice(&self.weight);
        out.extend_from_slice(&self.bias);
    }

    pub(crate) fn read_params(&mut self, src: &[T]) -> usize {
        let nw = self.weight.len();
        self.weight.copy_from_slice(&src[..nw]);
        self.bias.copy_from_slice(&src[nw..nw + self.out_dim]);
        nw + self.out_dim
    }
}
