use crate::error::{Error, Result};
use crate::scalar::Real;

/// Moment estimates and hyperparameters of the Adam optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
}

impl<T: Real> AdamState<T> {
    /// Fresh state with β₁=0.9, β₂=0.999, ε=1e-8.
    pub fn new(n_params: usize, lr: T) -> Self {
        Self::with_betas(n_params, lr, T::lit(0.9), T::lit(0.999), T::lit(1e-8))
    }

    pub fn with_betas(n_params: usize, lr: T, beta1: T, beta2: T, eps: T) -> Self {
        Self {
            step: 0,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            lr,
            beta1,
            beta2,
            eps,
        }
    }
}

/// One bias-corrected Adam update applied in place.
///
/// The gradient is validated before anything is mutated, so a failed step
/// leaves both `params` and `state` untouched.
pub fn adam_step<T: Real>(params: &mut [T], grads: &[T], state: &mut AdamState<T>) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            found: if grads.len() != params.len() {
                grads.len()
            } else {
                state.m.len()
            },
        });
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index, path: None });
    }
    state.step += 1;
    let t = state.step as i32;
    let bias1 = T::one() - state.beta1.powi(t);
    let bias2 = T::one() - state.beta2.powi(t);
    let one = T::one();
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = state.beta1 * *m + (one - state.beta1) * g;
        *v = state.beta2 * *v + (one - state.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_gradient_fresh_state_is_identity() {
        let mut p = vec![1.5, -2.0, 0.25];
        let mut s = AdamState::new(3, 0.003);
        adam_step(&mut p, &[0.0; 3], &mut s).unwrap();
        assert_eq!(p, vec![1.5, -2.0, 0.25]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        for &g in &[3.7f64, -0.02, 1e-3] {
            let mut p = vec![0.0];
            let mut s = AdamState::new(1, 0.01);
            adam_step(&mut p, &[g], &mut s).unwrap();
            let expected = -0.01 * g / (g.abs() + 1e-8);
            assert!((p[0] - expected).abs() < 1e-12);
            assert!((p[0] + 0.01 * g.signum()).abs() < 1e-7);
        }
    }

    #[test]
    fn two_steps_match_hand_unrolled() {
        let (lr, b1, b2, eps) = (0.05f64, 0.9f64, 0.999f64, 1e-8f64);
        let g1 = [0.5, -1.0, 2.0];
        let g2 = [0.1, 0.3, -4.0];
        let p0 = [1.0, 2.0, 3.0];
        let mut expected = [0.0; 3];
        for i in 0..3 {
            let m1 = (1.0 - b1) * g1[i];
            let v1 = (1.0 - b2) * g1[i] * g1[i];
            let p1 = p0[i] - lr * (m1 / (1.0 - b1)) / ((v1 / (1.0 - b2)).sqrt() + eps);
            let m2 = b1 * m1 + (1.0 - b1) * g2[i];
            let v2 = b2 * v1 + (1.0 - b2) * g2[i] * g2[i];
            let mh = m2 / (1.0 - b1 * b1);
            let vh = v2 / (1.0 - b2 * b2);
            expected[i] = p1 - lr * mh / (vh.sqrt() + eps);
        }
        let mut p = p0.to_vec();
        let mut s = AdamState::with_betas(3, lr, b1, b2, eps);
        adam_step(&mut p, &g1, &mut s).unwrap();
        adam_step(&mut p, &g2, &mut s).unwrap();
        for i in 0..3 {
            assert!((p[i] - expected[i]).abs() < 1e-14, "{i}: {} vs {}", p[i], expected[i]);
        }
        assert_eq!(s.step, 2);
    }

    #[test]
    fn non_finite_gradient_reports_index() {
        let mut p = vec![0.0; 4];
        let mut s = AdamState::new(4, 0.1);
        let err = adam_step(&mut p, &[0.0, 1.0, f64::NAN, 0.0], &mut s).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { index: 2, .. }));
        assert_eq!(s.step, 0);
        assert_eq!(p, vec![0.0; 4]);
    }

    proptest! {
        #[test]
        fn zero_gradient_identity_for_zero_moments(
            params in proptest::collection::vec(-1e3f64..1e3, 1..16),
            lr in 1e-5f64..1.0,
            b1 in 0.0f64..0.99,
            b2 in 0.0f64..0.9999,
            step in 0u64..1000,
        ) {
            let n = params.len();
            let mut s = AdamState::with_betas(n, lr, b1, b2, 1e-8);
            s.step = step;
            let mut p = params.clone();
            adam_step(&mut p, &vec![0.0; n], &mut s).unwrap();
            prop_assert_eq!(p, params);
        }
    }
}
