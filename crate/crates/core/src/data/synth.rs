use crate::error::{Error, Result};
use crate::flow::FlowStack;
use crate::numerics::{Matrix, Rng};
use crate::scalar::{dot, Real};

use super::VectorSet;

/// Parameters of the synthetic irregular-embedding generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub samples_per_class: usize,
    pub dim: usize,
    /// Standard deviation of the class means.
    pub mean_spread: f64,
    /// Range of the per-axis within-class scales.
    pub cov_scale_range: (f64, f64),
    /// Upper bound on the per-axis quadratic (skew) warp coefficient.
    pub skew_strength: f64,
    /// Upper bound on the per-axis cubic (tail) warp coefficient.
    pub tail_strength: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 50,
            samples_per_class: 100,
            dim: 20,
            mean_spread: 2.0,
            cov_scale_range: (0.5, 1.5),
            skew_strength: 0.3,
            tail_strength: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.classes == 0 || self.samples_per_class == 0 || self.dim == 0 {
            return bad("classes, samples_per_class and dim must be at least 1");
        }
        let (lo, hi) = self.cov_scale_range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo <= 0.0 {
            return bad("cov_scale_range must satisfy 0 < lo <= hi");
        }
        if !(self.skew_strength >= 0.0 && self.tail_strength >= 0.0 && self.mean_spread >= 0.0) {
            return bad("mean_spread and warp strengths must be non-negative");
        }
        Ok(())
    }
}

fn utt_id(class: usize, sample: usize) -> String {
    format!("c{class:04}_u{sample:05}")
}

/// Haar-distributed rotation from Gram-Schmidt on a Gaussian matrix.
pub(crate) fn random_rotation<T: Real>(dim: usize, rng: &mut Rng) -> Matrix<T> {
    loop {
        let mut cols: Vec<Vec<T>> = Vec::with_capacity(dim);
        let mut ok = true;
        for _ in 0..dim {
            let mut v: Vec<T> = rng.normal_vec(dim);
            for c in &cols {
                let p = dot(&v, c);
                v.iter_mut().zip(c).for_each(|(a, &b)| *a -= p * b);
            }
            let n = dot(&v, &v).sqrt();
            if n < T::lit(1e-8) {
                ok = false;
                break;
            }
            v.iter_mut().for_each(|a| *a /= n);
            cols.push(v);
        }
        if ok {
            let mut r = Matrix::zeros(dim, dim);
            for (j, c) in cols.iter().enumerate() {
                for i in 0..dim {
                    r[(i, j)] = c[i];
                }
            }
            return r;
        }
    }
}

/// Draws a labeled set whose classes are non-Gaussian and non-homogeneous.
///
/// Class `c` has mean `μ_c ~ N(0, σ²I)` and factor `L_c = R_c·diag(s_c)` with a
/// random rotation and per-axis scales in `cov_scale_range`. Each sample warps a
/// standard normal draw per axis, `u = s + a·s² + b·s³`, and emits `μ_c + L_c·u`.
pub fn synth_generate<T: Real>(cfg: &SynthConfig) -> Result<VectorSet<T>> {
    cfg.validate()?;
    let d = cfg.dim;
    let mut root = Rng::new(cfg.seed);
    let n = cfg.classes * cfg.samples_per_class;
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    let (lo, hi) = cfg.cov_scale_range;

    for c in 0..cfg.classes {
        let mut rng = root.fork();
        let spread = T::lit(cfg.mean_spread);
        let mean: Vec<T> = (0..d).map(|_| rng.normal::<T>() * spread).collect();
        let scales: Vec<T> = (0..d).map(|_| rng.uniform(T::lit(lo), T::lit(hi))).collect();
        let rot: Matrix<T> = random_rotation(d, &mut rng);
        let skew: Vec<T> = (0..d)
            .map(|_| {
                let a = rng.uniform(T::zero(), T::lit(cfg.skew_strength));
                if rng.coin() {
                    a
                } else {
                    -a
                }
            })
            .collect();
        let tail: Vec<T> = (0..d)
            .map(|_| rng.uniform(T::zero(), T::lit(cfg.tail_strength)))
            .collect();

        let mut u = vec![T::zero(); d];
        for s_idx in 0..cfg.samples_per_class {
            for j in 0..d {
                let s: T = rng.normal();
                u[j] = (s + skew[j] * s * s + tail[j] * s * s * s) * scales[j];
            }
            let x = rot.matvec(&u);
            data.extend(x.iter().zip(&mean).map(|(&a, &m)| a + m));
            ids.push(utt_id(c, s_idx));
            labels.push(c as i64);
        }
    }
    VectorSet::new(ids, labels, Matrix::from_vec(n, d, data)?)
}

/// Class-conditional Gaussians pushed through a random flow.
///
/// Latent codes are `N(μ_c, I)` with `μ_c ~ N(0, σ²I)`; observations are
/// `generate(flow, z)`. The scale range and warp strengths of `cfg` are unused:
/// all irregularity comes from the shared nonlinear map, which a flow can undo.
/// Returns the data together with the generating flow.
pub fn synth_flow_warped<T: Real>(
    cfg: &SynthConfig,
    blocks: usize,
    warp_scale: f64,
) -> Result<(VectorSet<T>, FlowStack<T>)> {
    cfg.validate()?;
    let d = cfg.dim;
    let mut root = Rng::new(cfg.seed);
    let flow = FlowStack::random(d, blocks, T::lit(warp_scale), &mut root.fork());
    let n = cfg.classes * cfg.samples_per_class;
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for c in 0..cfg.classes {
        let mut rng = root.fork();
        let spread = T::lit(cfg.mean_spread);
        let mean: Vec<T> = (0..d).map(|_| rng.normal::<T>() * spread).collect();
        for s_idx in 0..cfg.samples_per_class {
            let z: Vec<T> = mean.iter().map(|&m| m + rng.normal::<T>()).collect();
            data.extend(flow.generate(&z)?);
            ids.push(utt_id(c, s_idx));
            labels.push(c as i64);
        }
    }
    Ok((VectorSet::new(ids, labels, Matrix::from_vec(n, d, data)?)?, flow))
}
