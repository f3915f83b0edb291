use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::scalar::Real;

use super::MaskedLinear;

/// Three hidden ReLU layers with linear shift (μ) and log-scale (α) heads.
///
/// Input coordinate `i` has degree `i+1`; hidden units carry non-decreasing
/// degrees in `1..D-1`. A unit sees only lower-or-equal degrees, and output
/// `j` only hidden units of degree `≤ j`, so `μ_j, α_j` depend on `v_<j` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedConditioner<T> {
    dim: usize,
    pub(crate) hidden: [MaskedLinear<T>; 3],
    pub(crate) mu_head: MaskedLinear<T>,
    pub(crate) alpha_head: MaskedLinear<T>,
}

/// Activations kept for the backward pass (post-ReLU).
#[derive(Debug, Clone)]
pub(crate) struct ConditionerCache<T> {
    pub(crate) h: [Vec<T>; 3],
}

fn hidden_degrees(dim: usize, width: usize) -> Vec<usize> {
    if dim <= 1 {
        return vec![0; width];
    }
    (0..width).map(|k| 1 + k * (dim - 1) / width).collect()
}

/// Number of entries in a sorted degree list that are `≤ bound`.
fn count_le(degrees: &[usize], bound: usize) -> usize {
    degrees.partition_point(|&d| d <= bound)
}

impl<T: Real> MaskedConditioner<T> {
    /// All-zero parameters with the given hidden widths.
    pub fn zeros(dim: usize, widths: [usize; 3]) -> Result<Self> {
        if dim == 0 || widths.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "conditioner needs dim ≥ 1 and non-zero widths, got dim {dim}, widths {widths:?}"
            )));
        }
        let deg: Vec<Vec<usize>> = widths.iter().map(|&w| hidden_degrees(dim, w)).collect();
        // input i (degree i+1) is visible to a unit of degree m iff i < m
        let l0 = MaskedLinear::zeros(dim, deg[0].clone());
        let l1 = MaskedLinear::zeros(
            widths[0],
            deg[1].iter().map(|&m| count_le(&deg[0], m)).collect(),
        );
        let l2 = MaskedLinear::zeros(
            widths[1],
            deg[2].iter().map(|&m| count_le(&deg[1], m)).collect(),
        );
        // output j has degree j+1 and sees hidden degrees ≤ j
        let head_fan: Vec<usize> = (0..dim).map(|j| count_le(&deg[2], j)).collect();
        Ok(Self {
            dim,
            hidden: [l0, l1, l2],
            mu_head: MaskedLinear::zeros(widths[2], head_fan.clone()),
            alpha_head: MaskedLinear::zeros(widths[2], head_fan),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn widths(&self) -> [usize; 3] {
        [
            self.hidden[0].out_dim,
            self.hidden[1].out_dim,
            self.hidden[2].out_dim,
        ]
    }

    pub fn mu_head_mut(&mut self) -> &mut MaskedLinear<T> {
        &mut self.mu_head
    }

    pub fn alpha_head_mut(&mut self) -> &mut MaskedLinear<T> {
        &mut self.alpha_head
    }

    pub(crate) fn layers(&self) -> [&MaskedLinear<T>; 5] {
        [
            &self.hidden[0],
            &self.hidden[1],
            &self.hidden[2],
            &self.mu_head,
            &self.alpha_head,
        ]
    }

    pub(crate) fn layers_mut(&mut self) -> [&mut MaskedLinear<T>; 5] {
        let [a, b, c] = &mut self.hidden;
        [a, b, c, &mut self.mu_head, &mut self.alpha_head]
    }

    /// Hidden weights `~N(0, 1/fan_in)` and biases `~N(0, 0.1²)`; heads
    /// scaled by `head_scale` (zero heads make the block an identity map).
    /// Nonzero hidden biases keep units with all-dead inputs off the ReLU kink.
    pub(crate) fn init(&mut self, head_scale: T, rng: &mut Rng) {
        for l in &mut self.hidden {
            l.init_weights(T::one(), rng);
            l.init_bias(T::lit(0.1), rng);
        }
        if head_scale != T::zero() {
            for head in [&mut self.mu_head, &mut self.alpha_head] {
                head.init_weights(head_scale, rng);
                head.init_bias(head_scale, rng);
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers().iter().map(|l| l.num_params()).sum()
    }

    /// Shift and unclamped log-scale for input `v`.
    pub fn forward(&self, v: &[T]) -> (Vec<T>, Vec<T>) {
        let (mu, alpha, _) = self.forward_cached(v);
        (mu, alpha)
    }

    pub(crate) fn forward_cached(&self, v: &[T]) -> (Vec<T>, Vec<T>, ConditionerCache<T>) {
        let mut h: [Vec<T>; 3] = [
            vec![T::zero(); self.hidden[0].out_dim],
            vec![T::zero(); self.hidden[1].out_dim],
            vec![T::zero(); self.hidden[2].out_dim],
        ];
        self.hidden[0].forward(v, &mut h[0]);
        relu(&mut h[0]);
        {
            let (a, rest) = h.split_at_mut(1);
            self.hidden[1].forward(&a[0], &mut rest[0]);
        }
        relu(&mut h[1]);
        {
            let (a, rest) = h.split_at_mut(2);
            self.hidden[2].forward(&a[1], &mut rest[0]);
        }
        relu(&mut h[2]);
        let mut mu = vec![T::zero(); self.dim];
        let mut alpha = vec![T::zero(); self.dim];
        self.mu_head.forward(&h[2], &mut mu);
        self.alpha_head.forward(&h[2], &mut alpha);
        (mu, alpha, ConditionerCache { h })
    }

    /// Backpropagates `dmu`, `dalpha` (w.r.t. the unclamped heads) into the
    /// parameter gradient slice and accumulates the input gradient into `dv`.
    pub(crate) fn backward(
        &self,
        v: &[T],
        cache: &ConditionerCache<T>,
        dmu: &[T],
        dalpha: &[T],
        dv: &mut [T],
        grad: &mut [T],
    ) {
        let sizes: Vec<usize> = self.layers().iter().map(|l| l.num_params()).collect();
        let (g0, rest) = grad.split_at_mut(sizes[0]);
        let (g1, rest) = rest.split_at_mut(sizes[1]);
        let (g2, rest) = rest.split_at_mut(sizes[2]);
        let (gmu, galpha) = rest.split_at_mut(sizes[3]);

        let mut dh2 = vec![T::zero(); self.hidden[2].out_dim];
        self.mu_head.backward(&cache.h[2], dmu, &mut dh2, gmu);
        self.alpha_head.backward(&cache.h[2], dalpha, &mut dh2, galpha);
        relu_grad(&cache.h[2], &mut dh2);

        let mut dh1 = vec![T::zero(); self.hidden[1].out_dim];
        self.hidden[2].backward(&cache.h[1], &dh2, &mut dh1, g2);
        relu_grad(&cache.h[1], &mut dh1);

        let mut dh0 = vec![T::zero(); self.hidden[0].out_dim];
        self.hidden[1].backward(&cache.h[0], &dh1, &mut dh0, g1);
        relu_grad(&cache.h[0], &mut dh0);

        self.hidden[0].backward(v, &dh0, dv, g0);
    }

    pub(crate) fn write_params(&self, out: &mut Vec<T>) {
        for l in self.layers() {
            l.write_params(out);
        }
    }

    pub(crate) fn read_params(&mut self, src: &[T]) -> usize {
        let mut off = 0;
        for l in self.layers_mut() {
            off += l.read_params(&src[off..]);
        }
        off
    }

    /// Human-readable name of the parameter at `index` within this conditioner.
    pub(crate) fn param_name(&self, mut index: usize) -> String {
        const NAMES: [&str; 5] = ["hidden0", "hidden1", "hidden2", "mu_head", "alpha_head"];
        for (name, l) in NAMES.iter().zip(self.layers()) {
            let nw = l.weight.len();
            if index < nw {
                return format!("{name}.weight[{},{}]", index / l.in_dim, index % l.in_dim);
            }
            index -= nw;
            if index < l.out_dim {
                return format!("{name}.bias[{index}]");
            }
            index -= l.out_dim;
        }
        "out of range".into()
    }
}

fn relu<T: Real>(h: &mut [T]) {
    for x in h {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
}

fn relu_grad<T: Real>(h: &[T], dh: &mut [T]) {
    for (d, &a) in dh.iter_mut().zip(h) {
        if a <= T::zero() {
            *d = T::zero();
        }
    }
}
