use log::{debug, warn};

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::linear::{compute_scatter, regularize};
use crate::numerics::{sym_eig, Matrix};
use crate::scalar::Real;

use super::PldaModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PldaConfig {
    /// Maximum EM iterations; 0 returns the moment initialization.
    pub iters: usize,
    /// Stop once the log-likelihood gain is below `tol·|LL|`.
    pub tol: f64,
}

impl Default for PldaConfig {
    fn default() -> Self {
        Self { iters: 10, tol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct PldaFit<T> {
    pub model: PldaModel<T>,
    /// Total data log-likelihood before each EM step and after the last.
    pub log_likelihoods: Vec<f64>,
}

/// Coordinates where `Σ_w = I` and `Σ_b = diag(λ)`.
pub(crate) struct Basis<T> {
    /// Rows map centered data into the joint diagonal frame.
    pub t: Matrix<T>,
    pub t_inv: Matrix<T>,
    pub lambda: Vec<T>,
    pub log_det_w: T,
}

impl<T: Real> Basis<T> {
    pub fn new(sigma_b: &Matrix<T>, sigma_w: &Matrix<T>) -> Result<Self> {
        let (_, ew) = regularize(sigma_w, "PLDA within-class covariance")?;
        let w = ew.reconstruct_with(|l| T::one() / l.sqrt());
        let w_inv = ew.reconstruct_with(|l| l.sqrt());
        let mut bt = w.matmul(sigma_b).matmul(&w);
        bt.symmetrize();
        let eb = sym_eig(&bt)?;
        let lambda = eb.values.iter().map(|&l| l.max(T::zero())).collect();
        Ok(Self {
            t: eb.vectors.transpose().matmul(&w),
            t_inv: w_inv.matmul(&eb.vectors),
            lambda,
            log_det_w: ew.values.iter().map(|l| l.ln()).sum(),
        })
    }
}

struct ClassStat<T> {
    n: usize,
    mean: Vec<T>,
}

fn sandwich<T: Real>(a: &Matrix<T>, m: &Matrix<T>) -> Matrix<T> {
    let mut out = a.matmul(m).matmul(&a.transpose());
    out.symmetrize();
    out
}

pub fn plda_fit<T: Real>(set: &VectorSet<T>, iters: usize) -> Result<PldaModel<T>> {
    plda_fit_with(set, &PldaConfig { iters, ..PldaConfig::default() }).map(|f| f.model)
}

/// EM on per-class sufficient statistics (count, mean) plus the pooled
/// within-class scatter, with exact Gaussian posteriors of the class offsets.
pub fn plda_fit_with<T: Real>(set: &VectorSet<T>, cfg: &PldaConfig) -> Result<PldaFit<T>> {
    let classes = set.class_indices();
    if classes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "PLDA needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    if set.len() < 2 * classes.len() {
        return Err(Error::InsufficientData(format!(
            "PLDA needs 2 samples per class on average, found {} for {} classes",
            set.len(),
            classes.len()
        )));
    }
    let sc = compute_scatter(set)?;
    let n_total = T::from_count(set.len());
    let k_total = T::from_count(classes.len());
    let d = set.dim();
    // pooled within-class scatter, unnormalized
    let s_within = sc.within.scaled(n_total);
    let stats: Vec<ClassStat<T>> = set
        .class_means()
        .into_iter()
        .zip(classes.values())
        .map(|((_, mean), idx)| ClassStat { n: idx.len(), mean })
        .collect();

    let mut model = PldaModel {
        mean: sc.mean.clone(),
        sigma_b: sc.between,
        sigma_w: sc.within,
    };
    let mut lls = Vec::new();
    if cfg.iters == 0 {
        return Ok(PldaFit {
            model,
            log_likelihoods: lls,
        });
    }
    for it in 0..=cfg.iters {
        let basis = Basis::new(&model.sigma_b, &model.sigma_w)?;
        let s_t = sandwich(&basis.t, &s_within);
        let ubar: Vec<Vec<T>> = stats
            .iter()
            .map(|c| {
                let diff: Vec<T> = c.mean.iter().zip(&model.mean).map(|(&a, &b)| a - b).collect();
                basis.t.matvec(&diff)
            })
            .collect();

        let ll = log_likelihood(&basis, &s_t, &stats, &ubar, set.len());
        if !ll.is_finite() {
            return Err(Error::NonFinite(format!("PLDA log-likelihood at iteration {it}")));
        }
        debug!("PLDA EM iteration {it}: log-likelihood {ll:.6}");
        if let Some(&prev) = lls.last() {
            if ll < prev - 1e-8 * (1.0 + prev.abs()) {
                warn!("PLDA log-likelihood decreased from {prev} to {ll}");
            }
            lls.push(ll);
            if ll - prev < cfg.tol * ll.abs() {
                break;
            }
        } else {
            lls.push(ll);
        }
        if it == cfg.iters {
            break;
        }

        // E-step: per-dim posterior of the class offset
        let mut b_hat = Vec::with_capacity(stats.len());
        let mut v_post = Vec::with_capacity(stats.len());
        for (c, u) in stats.iter().zip(&ubar) {
            let n = T::from_count(c.n);
            let mut b = vec![T::zero(); d];
            let mut v = vec![T::zero(); d];
            for k in 0..d {
                let l = basis.lambda[k];
                let g = T::one() / (T::one() + n * l);
                b[k] = n * l * g * u[k];
                v[k] = l * g;
            }
            b_hat.push(b);
            v_post.push(v);
        }
        // M-step in the diagonal frame
        let mut delta = vec![T::zero(); d];
        for ((c, u), b) in stats.iter().zip(&ubar).zip(&b_hat) {
            let n = T::from_count(c.n);
            for k in 0..d {
                delta[k] += n * (u[k] - b[k]);
            }
        }
        delta.iter_mut().for_each(|x| *x /= n_total);
        let mut sw = s_t.clone();
        let mut sb = Matrix::zeros(d, d);
        let mut r = vec![T::zero(); d];
        for (((c, u), b), v) in stats.iter().zip(&ubar).zip(&b_hat).zip(&v_post) {
            let n = T::from_count(c.n);
            for k in 0..d {
                r[k] = u[k] - b[k] - delta[k];
            }
            for a in 0..d {
                for e in a..d {
                    sw[(a, e)] += n * r[a] * r[e];
                    sb[(a, e)] += b[a] * b[e];
                }
                sw[(a, a)] += n * v[a];
                sb[(a, a)] += v[a];
            }
        }
        for a in 0..d {
            for e in 0..a {
                sw[(a, e)] = sw[(e, a)];
                sb[(a, e)] = sb[(e, a)];
            }
        }
        let shift = basis.t_inv.matvec(&delta);
        model.mean.iter_mut().zip(&shift).for_each(|(m, s)| *m += *s);
        model.sigma_w = sandwich(&basis.t_inv, &sw.scaled(T::one() / n_total));
        model.sigma_b = sandwich(&basis.t_inv, &sb.scaled(T::one() / k_total));
    }
    Ok(PldaFit {
        model,
        log_likelihoods: lls,
    })
}

/// Marginal log-likelihood of all samples, computed in the diagonal frame.
fn log_likelihood<T: Real>(
    basis: &Basis<T>,
    s_t: &Matrix<T>,
    stats: &[ClassStat<T>],
    ubar: &[Vec<T>],
    n_samples: usize,
) -> f64 {
    let d = basis.lambda.len() as f64;
    let n = n_samples as f64;
    let mut ll = -0.5 * n * d * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * n * basis.log_det_w.as_f64()
        - 0.5 * s_t.trace().as_f64();
    for (c, u) in stats.iter().zip(ubar) {
        let nc = c.n as f64;
        for (k, &l) in basis.lambda.iter().enumerate() {
            let l = l.as_f64();
            let uk = u[k].as_f64();
            ll -= 0.5 * (1.0 + nc * l).ln() + 0.5 * nc * uk * uk / (1.0 + nc * l);
        }
    }
    ll
}
