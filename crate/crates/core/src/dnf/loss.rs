use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::flow::FlowStack;
use crate::scalar::Real;

use super::ClassPriors;

/// Samples per parallel work unit. Partial results are reduced in chunk
/// order, so the outcome does not depend on the thread count.
const CHUNK: usize = 32;

/// Mean negative log-likelihood with its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput<T> {
    pub nll: T,
    /// In [`FlowStack::params`] order.
    pub flow_grad: Vec<T>,
    /// Gradient per prior mean; empty for [`nf_loss`].
    pub prior_grad: BTreeMap<i64, Vec<T>>,
}

struct Partial<T> {
    neg_log_p: T,
    flow: Vec<T>,
    /// (prior position, −(z − μ)) per sample, unscaled.
    prior: Vec<(usize, Vec<T>)>,
}

fn log_2pi<T: Real>() -> T {
    T::lit((2.0 * std::f64::consts::PI).ln())
}

/// Shared implementation: `priors = None` means a single `N(0, I)` prior.
pub(crate) fn batch_loss<T: Real>(
    stack: &FlowStack<T>,
    priors: Option<&ClassPriors<T>>,
    set: &VectorSet<T>,
    idx: &[usize],
) -> Result<LossOutput<T>> {
    if idx.is_empty() {
        return Err(Error::InsufficientData("empty batch".into()));
    }
    if set.dim() != stack.dim() {
        return Err(Error::DimensionMismatch {
            expected: stack.dim(),
            found: set.dim(),
        });
    }
    let d = stack.dim();
    let zero = vec![T::zero(); d];
    // resolve priors up front so a missing label fails before any work
    let targets: Vec<(usize, &[T])> = idx
        .iter()
        .map(|&i| match priors {
            Some(p) => {
                let label = set.labels()[i];
                Ok((p.position(label)?, p.mean(label)?))
            }
            None => Ok((0, zero.as_slice())),
        })
        .collect::<Result<_>>()?;
    let n_params = stack.num_params();
    let scale = T::one() / T::from_count(idx.len());
    let half = T::lit(0.5);
    let const_term = half * T::from_count(d) * log_2pi::<T>();

    let partials: Vec<Partial<T>> = idx
        .par_chunks(CHUNK)
        .zip(targets.par_chunks(CHUNK))
        .map(|(chunk, tchunk)| -> Result<Partial<T>> {
            let mut p = Partial {
                neg_log_p: T::zero(),
                flow: vec![T::zero(); n_params],
                prior: Vec::with_capacity(chunk.len()),
            };
            for (&i, &(pos, mu)) in chunk.iter().zip(tchunk) {
                let cache = stack.normalize_cached(set.vector(i))?;
                let diff: Vec<T> = cache.z.iter().zip(mu).map(|(&z, &m)| z - m).collect();
                let sq: T = diff.iter().map(|&v| v * v).sum();
                p.neg_log_p += const_term + half * sq - cache.logdet;
                // d/dz of the per-sample term is (z − μ); scaled below
                let dz: Vec<T> = diff.iter().map(|&v| v * scale).collect();
                stack.backward_into(&cache, &dz, -scale, &mut p.flow);
                if priors.is_some() {
                    p.prior.push((pos, dz.iter().map(|&v| -v).collect()));
                }
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;

    let mut nll = T::zero();
    let mut flow_grad = vec![T::zero(); n_params];
    let mut prior_flat = vec![T::zero(); priors.map_or(0, |p| p.len() * d)];
    for p in partials {
        nll += p.neg_log_p;
        for (g, v) in flow_grad.iter_mut().zip(&p.flow) {
            *g += *v;
        }
        for (pos, g) in p.prior {
            for (acc, v) in prior_flat[pos * d..(pos + 1) * d].iter_mut().zip(g) {
                *acc += v;
            }
        }
    }
    nll *= scale;
    if !nll.is_finite() {
        return Err(Error::NonFinite("negative log-likelihood".into()));
    }
    if let Some(index) = flow_grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient {
            index,
            path: Some(stack.param_path(index)),
        });
    }
    if let Some(index) = prior_flat.iter().position(|g| !g.is_finite()) {
        let index = n_params + index;
        return Err(Error::NonFiniteGradient {
            index,
            path: Some(stack.param_path(index)),
        });
    }
    let prior_grad = match priors {
        Some(p) => p
            .means()
            .keys()
            .zip(prior_flat.chunks(d.max(1)))
            .map(|(&l, g)| (l, g.to_vec()))
            .collect(),
        None => BTreeMap::new(),
    };
    Ok(LossOutput {
        nll,
        flow_grad,
        prior_grad,
    })
}

/// DNF objective: mean of `−ln N(z; μ_y, I) − ln|det ∂z/∂x|` over the batch.
pub fn dnf_loss<T: Real>(
    stack: &FlowStack<T>,
    priors: &ClassPriors<T>,
    batch: &VectorSet<T>,
) -> Result<LossOutput<T>> {
    let idx: Vec<usize> = (0..batch.len()).collect();
    batch_loss(stack, Some(priors), batch, &idx)
}

/// Vanilla NF objective with the single prior `N(0, I)`; labels are ignored.
pub fn nf_loss<T: Real>(stack: &FlowStack<T>, batch: &VectorSet<T>) -> Result<LossOutput<T>> {
    let idx: Vec<usize> = (0..batch.len()).collect();
    batch_loss(stack, None, batch, &idx)
}

/// Mean negative log-likelihood of the whole set, without gradients.
pub fn set_nll<T: Real>(
    stack: &FlowStack<T>,
    priors: Option<&ClassPriors<T>>,
    set: &VectorSet<T>,
) -> Result<T> {
    let d = stack.dim();
    let const_term = T::lit(0.5) * T::from_count(d) * log_2pi::<T>();
    let zero = vec![T::zero(); d];
    let idx: Vec<usize> = (0..set.len()).collect();
    let sums: Vec<T> = idx
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<T> {
            let mut s = T::zero();
            for &i in chunk {
                let mu = match priors {
                    Some(p) => p.mean(set.labels()[i])?,
                    None => zero.as_slice(),
                };
                let (z, logdet) = stack.normalize(set.vector(i))?;
                let sq: T = z.iter().zip(mu).map(|(&a, &b)| (a - b) * (a - b)).sum();
                s += const_term + T::lit(0.5) * sq - logdet;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let nll = sums.into_iter().fold(T::zero(), |a, b| a + b) / T::from_count(set.len().max(1));
    if !nll.is_finite() {
        return Err(Error::NonFinite("negative log-likelihood".into()));
    }
    Ok(nll)
}

/// Latent codes of every vector; ids and labels carry through.
pub fn normalize_set<T: Real>(stack: &FlowStack<T>, set: &VectorSet<T>) -> Result<VectorSet<T>> {
    if set.dim() != stack.dim() {
        return Err(Error::DimensionMismatch {
            expected: stack.dim(),
            found: set.dim(),
        });
    }
    set.par_try_map(stack.dim(), |x| stack.normalize(x).map(|(z, _)| z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_gradient, Matrix, Rng};

    fn set(rows: Vec<Vec<f64>>, labels: Vec<i64>) -> VectorSet<f64> {
        let n = rows.len();
        VectorSet::new((0..n).map(|i| format!("u{i}")).collect(), labels, Matrix::from_rows(&rows).unwrap())
            .unwrap()
    }

    fn identity(dim: usize) -> FlowStack<f64> {
        FlowStack::with_default_widths(dim, 2, &mut Rng::new(0)).unwrap()
    }

    #[test]
    fn gaussian_at_its_mean() {
        let priors = ClassPriors::new(2, [(3, vec![0.5, -1.0])].into()).unwrap();
        let s = set(vec![vec![0.5, -1.0]], vec![3]);
        let out = dnf_loss(&identity(2), &priors, &s).unwrap();
        assert!((out.nll - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
        assert!((out.nll - 1.8379).abs() < 1e-4);
        let shifted = set(vec![vec![0.5 + 0.6, -1.0 - 0.8]], vec![3]);
        let out2 = dnf_loss(&identity(2), &priors, &shifted).unwrap();
        assert!((out2.nll - out.nll - 0.5).abs() < 1e-14);
    }

    #[test]
    fn nf_at_origin() {
        let s = set(vec![vec![0.0, 0.0]], vec![0]);
        let out = nf_loss(&identity(2), &s).unwrap();
        assert!((out.nll - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
        assert!(out.prior_grad.is_empty());
    }

    #[test]
    fn batch_is_mean_of_single_samples() {
        let mut rng = Rng::new(5);
        let stack = FlowStack::random(3, 2, 0.5, &mut rng);
        let rows: Vec<Vec<f64>> = (0..5).map(|_| rng.normal_vec(3)).collect();
        let labels = vec![0, 1, 0, 2, 1];
        let priors = ClassPriors::new(3, (0..3).map(|l| (l, rng.normal_vec(3))).collect()).unwrap();
        let batch = dnf_loss(&stack, &priors, &set(rows.clone(), labels.clone())).unwrap();
        let mut total = 0.0;
        for (r, &l) in rows.iter().zip(&labels) {
            let (z, logdet) = stack.normalize(r).unwrap();
            let mu = priors.mean(l).unwrap();
            let sq: f64 = z.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
            total += (2.0 * std::f64::consts::PI).ln() * 1.5 + 0.5 * sq - logdet;
        }
        assert!((batch.nll - total / 5.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_means_collapse_to_nf_bit_exactly() {
        let mut rng = Rng::new(6);
        let stack = FlowStack::random(4, 2, 0.4, &mut rng);
        let rows: Vec<Vec<f64>> = (0..70).map(|_| rng.normal_vec(4)).collect();
        let labels: Vec<i64> = (0..70).map(|i| i % 3).collect();
        let s = set(rows, labels);
        let priors = ClassPriors::zeros(4, 0..3);
        let a = dnf_loss(&stack, &priors, &s).unwrap();
        let b = nf_loss(&stack, &s).unwrap();
        assert_eq!(a.nll.to_bits(), b.nll.to_bits());
        assert_eq!(a.flow_grad, b.flow_grad);
    }

    #[test]
    fn translation_covariance_at_identity() {
        let mut rng = Rng::new(7);
        let rows: Vec<Vec<f64>> = (0..6).map(|_| rng.normal_vec(2)).collect();
        let labels = vec![0, 1, 0, 1, 1, 0];
        let priors = ClassPriors::new(2, [(0, vec![0.2, 0.1]), (1, vec![-1.0, 0.5])].into()).unwrap();
        let base = dnf_loss(&identity(2), &priors, &set(rows.clone(), labels.clone())).unwrap();
        let c = [3.0, -2.0];
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .zip(&labels)
            .map(|(r, &l)| if l == 1 { vec![r[0] + c[0], r[1] + c[1]] } else { r.clone() })
            .collect();
        let priors2 = ClassPriors::new(2, [(0, vec![0.2, 0.1]), (1, vec![2.0, -1.5])].into()).unwrap();
        let out = dnf_loss(&identity(2), &priors2, &set(moved, labels)).unwrap();
        assert!((out.nll - base.nll).abs() <= 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(8);
        let stack = FlowStack::random(3, 2, 0.5, &mut rng);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| rng.normal_vec(3)).collect();
        let labels: Vec<i64> = (0..40).map(|i| i % 2).collect();
        let s = set(rows, labels);
        for priors in [None, Some(ClassPriors::new(3, (0..2).map(|l| (l, rng.normal_vec(3))).collect()).unwrap())] {
            let idx: Vec<usize> = (0..s.len()).collect();
            let out = batch_loss(&stack, priors.as_ref(), &s, &idx).unwrap();
            let mut x = stack.params();
            let np = x.len();
            if let Some(p) = &priors {
                x.extend(p.flat());
            }
            let f = |params: &[f64]| {
                let mut st = stack.clone();
                st.set_params(&params[..np])?;
                match &priors {
                    Some(p) => {
                        let mut p = p.clone();
                        p.set_flat(&params[np..])?;
                        Ok(batch_loss(&st, Some(&p), &s, &idx)?.nll)
                    }
                    None => Ok(batch_loss(&st, None, &s, &idx)?.nll),
                }
            };
            let fd = finite_diff_gradient(f, &x, 1e-6).unwrap();
            let mut analytic = out.flow_grad.clone();
            for g in out.prior_grad.values() {
                analytic.extend(g);
            }
            for (i, (a, n)) in analytic.iter().zip(&fd).enumerate() {
                let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-5);
                assert!(rel <= 1e-4, "{}: {a} vs {n}", stack.param_path(i));
            }
        }
    }

    #[test]
    fn missing_prior_and_dims() {
        let priors = ClassPriors::zeros(2, [0]);
        let s = set(vec![vec![1.0, 2.0]], vec![9]);
        assert!(matches!(dnf_loss(&identity(2), &priors, &s), Err(Error::MissingPrior(9))));
        assert!(nf_loss(&identity(3), &s).is_err());
    }

    #[test]
    fn normalize_set_matches_loop() {
        let mut rng = Rng::new(9);
        let stack = FlowStack::random(3, 3, 0.3, &mut rng);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| rng.normal_vec(3)).collect();
        let s = set(rows, (0..50).map(|i| i % 4).collect());
        let z = normalize_set(&stack, &s).unwrap();
        assert_eq!(z.labels(), s.labels());
        assert_eq!(z.ids(), s.ids());
        for i in 0..50 {
            assert_eq!(z.vector(i), stack.normalize(s.vector(i)).unwrap().0.as_slice());
        }
        let id = normalize_set(&identity(3), &s).unwrap();
        assert_eq!(id.vectors(), s.vectors());
    }
}
