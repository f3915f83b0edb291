use crate::error::{Error, Result};
use crate::scalar::Real;

use super::conditioner::{ConditionerCache, MaskedConditioner};

/// Log-scales are clamped to `[-ALPHA_CLAMP, ALPHA_CLAMP]` before `exp`.
pub const ALPHA_CLAMP: f64 = 7.0;

/// One autoregressive affine block acting in a permuted coordinate order.
#[derive(Debug, Clone, PartialEq)]
pub struct MafBlock<T> {
    pub(crate) conditioner: MaskedConditioner<T>,
    /// `v[j] = u[perm[j]]` before the transform.
    pub(crate) perm: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct BlockCache<T> {
    pub(crate) v: Vec<T>,
    pub(crate) cond: ConditionerCache<T>,
    pub(crate) alpha_raw: Vec<T>,
    /// `exp(−α_j)` with α clamped.
    pub(crate) inv_scale: Vec<T>,
    /// Block output in permuted order.
    pub(crate) w: Vec<T>,
}

pub(crate) fn clamp_alpha<T: Real>(a: T) -> T {
    let c = T::lit(ALPHA_CLAMP);
    a.max(-c).min(c)
}

impl<T: Real> MafBlock<T> {
    pub fn new(conditioner: MaskedConditioner<T>, perm: Vec<usize>) -> Result<Self> {
        let d = conditioner.dim();
        if perm.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidConfig(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self { conditioner, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn conditioner(&self) -> &MaskedConditioner<T> {
        &self.conditioner
    }

    pub fn conditioner_mut(&mut self) -> &mut MaskedConditioner<T> {
        &mut self.conditioner
    }

    /// Input reordered into the block's autoregressive order.
    pub fn permute(&self, u: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| u[p]).collect()
    }

    pub(crate) fn normalize_cached(&self, u: &[T], index: usize) -> Result<(Vec<T>, T, BlockCache<T>)> {
        let v = self.permute(u);
        let (mu, alpha_raw, cond) = self.conditioner.forward_cached(&v);
        let mut out = vec![T::zero(); v.len()];
        let mut w = vec![T::zero(); v.len()];
        let mut inv_scale = vec![T::zero(); v.len()];
        let mut logdet = T::zero();
        for j in 0..v.len() {
            let a = clamp_alpha(alpha_raw[j]);
            let e = (-a).exp();
            inv_scale[j] = e;
            w[j] = (v[j] - mu[j]) * e;
            logdet -= a;
            out[self.perm[j]] = w[j];
        }
        if !w.iter().all(|x| x.is_finite()) || !logdet.is_finite() {
            return Err(Error::NumericOverflow { block: index });
        }
        let cache = BlockCache {
            v,
            cond,
            alpha_raw,
            inv_scale,
            w,
        };
        Ok((out, logdet, cache))
    }

    /// Normalizing direction: returns the block output and its log-determinant.
    pub fn normalize(&self, u: &[T], index: usize) -> Result<(Vec<T>, T)> {
        let (out, logdet, _) = self.normalize_cached(u, index)?;
        Ok((out, logdet))
    }

    /// Inverse of [`normalize`](Self::normalize), solved one coordinate at a time.
    pub fn generate(&self, out: &[T], index: usize) -> Result<Vec<T>> {
        let d = self.dim();
        let w: Vec<T> = self.perm.iter().map(|&p| out[p]).collect();
        let mut v = vec![T::zero(); d];
        for j in 0..d {
            // μ_j, α_j only read v_<j, which are already final
            let (mu, alpha) = self.conditioner.forward(&v);
            v[j] = mu[j] + w[j] * clamp_alpha(alpha[j]).exp();
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NumericOverflow { block: index });
        }
        let mut u = vec![T::zero(); d];
        for (j, &p) in self.perm.iter().enumerate() {
            u[p] = v[j];
        }
        Ok(u)
    }

    /// Backward through one block. `dout` is the gradient w.r.t. the block
    /// output (original order); returns the gradient w.r.t. its input.
    pub(crate) fn backward(
        &self,
        cache: &BlockCache<T>,
        dout: &[T],
        dlogdet: T,
        grad: &mut [T],
    ) -> Vec<T> {
        let d = self.dim();
        let c = T::lit(ALPHA_CLAMP);
        let mut dv = vec![T::zero(); d];
        let mut dmu = vec![T::zero(); d];
        let mut dalpha = vec![T::zero(); d];
        for j in 0..d {
            let gw = dout[self.perm[j]];
            let e = cache.inv_scale[j];
            dv[j] = gw * e;
            dmu[j] = -gw * e;
            let a = cache.alpha_raw[j];
            if a > -c && a < c {
                dalpha[j] = -gw * cache.w[j] - dlogdet;
            }
        }
        self.conditioner
            .backward(&cache.v, &cache.cond, &dmu, &dalpha, &mut dv, grad);
        let mut du = vec![T::zero(); d];
        for (j, &p) in self.perm.iter().enumerate() {
            du[p] = dv[j];
        }
        du
    }
}
