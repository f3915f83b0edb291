use std::cmp::Ordering;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig<T> {
    /// Eigenvalues, descending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Matrix<T>,
}

impl<T: Real> SymEig<T> {
    /// Eigenvector `k` as a contiguous vector.
    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }

    /// Rebuilds `V·diag(f(λ))·Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)];
                }
            }
        }
        out.symmetrize();
        out
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order; equal eigenvalues keep the
/// order of the diagonal positions they converged on. Each eigenvector is
/// signed so that its largest-magnitude component is positive.
pub fn sym_eig<T: Real>(m: &Matrix<T>) -> Result<SymEig<T>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigendecomposition input".into()));
    }
    let fro = m.frobenius_norm();
    let sym_tol = T::lit(1e-10).max(T::epsilon() * T::lit(16.0)) * fro;
    let asym = m.max_asymmetry();
    if asym > sym_tol {
        return Err(Error::SymmetryViolation {
            max_asymmetry: asym.as_f64(),
        });
    }

    let mut a = m.clone();
    a.symmetrize();
    // rows of `vt` are the eigenvectors being accumulated
    let mut vt = Matrix::<T>::identity(n);
    let hundred = T::lit(100.0);
    let half = T::lit(0.5);

    let mut converged = n < 2;
    for sweep in 0..MAX_SWEEPS {
        let mut off_sum = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off_sum += a[(p, q)].abs();
            }
        }
        if off_sum == T::zero() {
            converged = true;
            break;
        }
        let thresh = if sweep < 3 {
            T::lit(0.2) * off_sum / T::from_count(n * n)
        } else {
            T::zero()
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = hundred * apq.abs();
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                if apq.abs() <= thresh || apq == T::zero() {
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = half * h / apq;
                    let t = T::one() / (theta.abs() + (T::one() + theta * theta).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let tau = s / (T::one() + c);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_kp = akp - s * (akq + akp * tau);
                    let new_kq = akq + s * (akp - akq * tau);
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp;
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq;
                }
                let cols = vt.cols();
                let data = vt.as_mut_slice();
                let (lo, hi) = data.split_at_mut(q * cols);
                let row_p = &mut lo[p * cols..(p + 1) * cols];
                let row_q = &mut hi[..cols];
                for (vp, vq) in row_p.iter_mut().zip(row_q.iter_mut()) {
                    let gp = *vp;
                    let hq = *vq;
                    *vp = gp - s * (hq + gp * tau);
                    *vq = hq + s * (gp - hq * tau);
                }
            }
        }
    }
    if !converged {
        return Err(Error::IterationLimit { sweeps: MAX_SWEEPS });
    }

    let diag = a.diag();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps coordinate order among ties
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(Ordering::Equal));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Matrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        values.push(diag[src]);
        let v = vt.row(src);
        let mut lead = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[lead].abs() {
                lead = i;
            }
        }
        let sign = if v[lead] < T::zero() { -T::one() } else { T::one() };
        for (i, &x) in v.iter().enumerate() {
            vectors[(i, k)] = x * sign;
        }
    }
    Ok(SymEig { values, vectors })
}

/// `M^power` for symmetric positive semi-definite `M`, eigenvalues floored at `floor`.
pub fn sym_pow<T: Real>(m: &Matrix<T>, power: T, floor: T) -> Result<Matrix<T>> {
    let eig = sym_eig(m)?;
    Ok(eig.reconstruct_with(|l| l.max(floor).powf(power)))
}

/// `M^{-1/2}` for symmetric positive definite `M`.
pub fn sym_inv_sqrt<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = sym_eig(m)?;
    if let Some(&min) = eig.values.last() {
        if min <= T::zero() {
            return Err(Error::DegenerateScatter(format!(
                "matrix is not positive definite (min eigenvalue {min:e})"
            )));
        }
    }
    Ok(eig.reconstruct_with(|l| T::one() / l.sqrt()))
}
