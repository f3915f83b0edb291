use proptest::prelude::*;

use super::*;
use crate::numerics::{finite_diff_gradient, sym_eig, Matrix, Rng};

fn single_block(dim: usize) -> FlowStack<f64> {
    FlowStack::with_default_widths(dim, 1, &mut Rng::new(0)).unwrap()
}

/// Finite-difference Jacobian of `normalize`, columns by input coordinate.
fn fd_jacobian(stack: &FlowStack<f64>, x: &[f64], h: f64) -> Matrix<f64> {
    let d = x.len();
    let mut j = Matrix::zeros(d, d);
    for c in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        let zp = stack.normalize(&xp).unwrap().0;
        let zm = stack.normalize(&xm).unwrap().0;
        for r in 0..d {
            j[(r, c)] = (zp[r] - zm[r]) / (2.0 * h);
        }
    }
    j
}

/// ln|det J| through the eigenvalues of JᵀJ (independent of the triangular structure).
fn log_abs_det(j: &Matrix<f64>) -> f64 {
    let jtj = j.transpose().matmul(j);
    sym_eig(&jtj).unwrap().values.iter().map(|l| 0.5 * l.ln()).sum()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[test]
fn identity_flow_is_identity() {
    let stack = FlowStack::<f64>::with_default_widths(5, 4, &mut Rng::new(1)).unwrap();
    let x = [0.3, -1.2, 4.0, 0.0, 2.5];
    let (z, logdet) = stack.normalize(&x).unwrap();
    assert_eq!(z, x.to_vec());
    assert_eq!(logdet, 0.0);
    assert_eq!(stack.generate(&x).unwrap(), x.to_vec());
}

#[test]
fn pure_shift_block() {
    let mut stack = single_block(3);
    stack.blocks_mut()[0]
        .conditioner_mut()
        .mu_head_mut()
        .bias_mut()
        .copy_from_slice(&[1.0, 1.0, 1.0]);
    let (z, logdet) = stack.normalize(&[2.0, 0.5, -1.0]).unwrap();
    assert_eq!(z, vec![1.0, -0.5, -2.0]);
    assert_eq!(logdet, 0.0);
    assert_eq!(stack.generate(&[0.0, 0.0, 0.0]).unwrap(), vec![1.0, 1.0, 1.0]);
}

#[test]
fn constant_log_scale_logdet() {
    let mut stack = single_block(3);
    stack.blocks_mut()[0]
        .conditioner_mut()
        .alpha_head_mut()
        .bias_mut()
        .copy_from_slice(&[0.1, 0.2, 0.3]);
    let mut rng = Rng::new(3);
    let x: Vec<f64> = rng.normal_vec(3);
    let (z, logdet) = stack.normalize(&x).unwrap();
    assert!((logdet + 0.6).abs() < 1e-15);
    assert!((z[2] - x[2] * (-0.3f64).exp()).abs() < 1e-15);
    let fd = log_abs_det(&fd_jacobian(&stack, &x, 1e-5));
    assert!((fd - logdet).abs() < 1e-8, "fd {fd} vs {logdet}");
}

#[test]
fn alpha_is_clamped() {
    let mut stack = single_block(2);
    stack.blocks_mut()[0]
        .conditioner_mut()
        .alpha_head_mut()
        .bias_mut()
        .copy_from_slice(&[50.0, -50.0]);
    let (z, logdet) = stack.normalize(&[1.0, 1.0]).unwrap();
    assert_eq!(logdet, 0.0);
    assert!((z[0] - (-7.0f64).exp()).abs() < 1e-15);
    assert!((z[1] - 7.0f64.exp()).abs() < 1e-9);
    let x = stack.generate(&z).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
}

#[test]
fn overflow_names_block() {
    let mut stack = FlowStack::<f64>::with_default_widths(2, 2, &mut Rng::new(0)).unwrap();
    stack.blocks_mut()[1]
        .conditioner_mut()
        .alpha_head_mut()
        .bias_mut()
        .copy_from_slice(&[-7.0, -7.0]);
    let err = stack.normalize(&[1e306, 1e306]).unwrap_err();
    assert!(matches!(err, crate::Error::NumericOverflow { block: 1 }), "{err}");
}

#[test]
fn rejects_wrong_dimension_and_non_finite() {
    let stack = single_block(3);
    assert!(stack.normalize(&[1.0, 2.0]).is_err());
    assert!(stack.normalize(&[1.0, f64::NAN, 0.0]).is_err());
}

#[test]
fn random_round_trip() {
    let mut rng = Rng::new(8);
    for _ in 0..20 {
        let stack = FlowStack::<f64>::random(6, 4, 0.5, &mut rng);
        let x: Vec<f64> = rng.normal_vec(6);
        let (z, _) = stack.normalize(&x).unwrap();
        let back = stack.generate(&z).unwrap();
        let err = x.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-6, "{err}");
    }
}

#[test]
fn backward_identity_flow_passes_gradient_through() {
    let stack = FlowStack::<f64>::with_default_widths(3, 2, &mut Rng::new(2)).unwrap();
    let x = [0.5, -1.0, 2.0];
    // gradient of ln N(z; 0, I) with respect to z is −z
    let dz: Vec<f64> = x.iter().map(|v| -v).collect();
    let g = flow_backward(&stack, &x, &dz, 0.0).unwrap();
    assert_eq!(g.input, dz);
}

#[test]
fn backward_zero_upstream_is_zero() {
    let mut rng = Rng::new(4);
    let stack = FlowStack::<f64>::random(4, 3, 0.5, &mut rng);
    let x: Vec<f64> = rng.normal_vec(4);
    let g = flow_backward(&stack, &x, &[0.0; 4], 0.0).unwrap();
    assert!(g.params.iter().all(|&v| v == 0.0));
    assert!(g.input.iter().all(|&v| v == 0.0));
}

#[test]
fn backward_matches_finite_differences() {
    let mut rng = Rng::new(21);
    let stack = FlowStack::<f64>::random(3, 2, 0.5, &mut rng);
    let x: Vec<f64> = rng.normal_vec(3);
    let dz: Vec<f64> = rng.normal_vec(3);
    let dld = 0.7;
    let objective = |s: &FlowStack<f64>, x: &[f64]| -> crate::Result<f64> {
        let (z, ld) = s.normalize(x)?;
        Ok(z.iter().zip(&dz).map(|(a, b)| a * b).sum::<f64>() + dld * ld)
    };
    let g = flow_backward(&stack, &x, &dz, dld).unwrap();

    let p0 = stack.params();
    let mut probe = stack.clone();
    let num = finite_diff_gradient(
        |p: &[f64]| {
            probe.set_params(p)?;
            objective(&probe, &x)
        },
        &p0,
        1e-6,
    )
    .unwrap();
    for (i, (&a, &n)) in g.params.iter().zip(&num).enumerate() {
        assert!(rel_err(a, n) <= 1e-4, "{}: analytic {a} numeric {n}", stack.param_path(i));
    }
    let num_x = finite_diff_gradient(|xx: &[f64]| objective(&stack, xx), &x, 1e-6).unwrap();
    for (&a, &n) in g.input.iter().zip(&num_x) {
        assert!(rel_err(a, n) <= 1e-4, "dx analytic {a} numeric {n}");
    }
}

#[test]
fn param_round_trip_and_paths() {
    let mut rng = Rng::new(5);
    let stack = FlowStack::<f64>::random(3, 2, 0.5, &mut rng);
    let p = stack.params();
    assert_eq!(p.len(), stack.num_params());
    let mut other = FlowStack::<f64>::with_default_widths(3, 2, &mut Rng::new(99)).unwrap();
    other.set_params(&p).unwrap();
    assert_eq!(other, stack);
    assert!(stack.param_path(0).starts_with("block[0].hidden0.weight[0,0]"));
    let last = stack.num_params() - 1;
    assert_eq!(stack.param_path(last), "block[1].alpha_head.bias[2]");
    assert!(other.set_params(&p[1..]).is_err());
}

#[test]
fn container_round_trip_and_text() {
    let mut rng = Rng::new(6);
    let stack = FlowStack::<f64>::random(4, 3, 0.3, &mut rng);
    let back = FlowStack::<f64>::from_bytes(&stack.to_bytes()).unwrap();
    assert_eq!(back, stack);
    let text = stack.to_text();
    assert!(text.starts_with("DNF1 dim 4 blocks 3"));
    assert!(text.contains("block 1 perm 3 2 1 0"));
    let mut bytes = stack.to_bytes();
    bytes[0] = b'X';
    assert!(matches!(
        FlowStack::<f64>::from_bytes(&bytes),
        Err(crate::Error::BadMagic { .. })
    ));
    let bytes = stack.to_bytes();
    assert!(FlowStack::<f64>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn single_precision_flow() {
    let mut rng = Rng::new(7);
    let stack = FlowStack::<f32>::random(4, 3, 0.3, &mut rng);
    let x: Vec<f32> = rng.normal_vec(4);
    let (z, _) = stack.normalize(&x).unwrap();
    let back = stack.generate(&z).unwrap();
    for (a, b) in x.iter().zip(&back) {
        assert!((a - b).abs() < 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn autoregressive_masking(seed in any::<u64>(), dim in 1usize..10, j_frac in 0.0f64..1.0) {
        let mut rng = Rng::new(seed);
        let mut cond = MaskedConditioner::<f64>::zeros(dim, [dim + 2, dim, dim + 1]).unwrap();
        cond.init(1.0, &mut rng);
        let j = ((j_frac * dim as f64) as usize).min(dim - 1);
        let v: Vec<f64> = rng.normal_vec(dim);
        let mut w = v.clone();
        for item in w.iter_mut().skip(j) {
            *item += rng.normal::<f64>() * 10.0;
        }
        let (mu_a, al_a) = cond.forward(&v);
        let (mu_b, al_b) = cond.forward(&w);
        prop_assert_eq!(mu_a[j].to_bits(), mu_b[j].to_bits());
        prop_assert_eq!(al_a[j].to_bits(), al_b[j].to_bits());
    }

    #[test]
    fn invertibility(seed in any::<u64>(), dim in 1usize..12, blocks in 1usize..6) {
        let mut rng = Rng::new(seed);
        let stack = FlowStack::<f64>::random(dim, blocks, 0.5, &mut rng);
        let x: Vec<f64> = rng.normal_vec(dim);
        let z = stack.normalize(&x).unwrap().0;
        let back = stack.generate(&z).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn logdet_matches_jacobian(seed in any::<u64>(), dim in 1usize..6, blocks in 1usize..4) {
        let mut rng = Rng::new(seed);
        let stack = FlowStack::<f64>::random(dim, blocks, 0.5, &mut rng);
        let x: Vec<f64> = rng.normal_vec(dim);
        let (_, logdet) = stack.normalize(&x).unwrap();
        let fd = log_abs_det(&fd_jacobian(&stack, &x, 1e-5));
        prop_assert!((fd - logdet).abs() <= 1e-4, "fd {} analytic {}", fd, logdet);
    }

    #[test]
    fn logdet_composes_over_blocks(seed in any::<u64>(), dim in 1usize..8, blocks in 1usize..6) {
        let mut rng = Rng::new(seed);
        let stack = FlowStack::<f64>::random(dim, blocks, 0.5, &mut rng);
        let x: Vec<f64> = rng.normal_vec(dim);
        let (states, lds) = stack.trajectory(&x).unwrap();
        let mut total = 0.0;
        for (i, b) in stack.blocks().iter().enumerate() {
            let (out, ld) = b.normalize(&states[i], i).unwrap();
            prop_assert_eq!(&out, &states[i + 1]);
            prop_assert_eq!(ld, lds[i]);
            total += ld;
        }
        let (_, logdet) = stack.normalize(&x).unwrap();
        prop_assert!((total - logdet).abs() <= 1e-12);
    }
}
