use crate::data::TrialList;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Equal error rate and the interpolated threshold where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eer<T> {
    pub eer: f64,
    pub threshold: T,
}

/// EER by sweeping every distinct score as a threshold.
///
/// A trial is accepted when its score is `>= θ`. At each threshold
/// `FAR = #{nontarget ≥ θ}/N_n` and `FRR = #{target < θ}/N_t`; a final point
/// above every score has FAR 0, FRR 1. The EER is read off by linear
/// interpolation between the first pair of operating points where
/// `FRR − FAR` changes sign.
pub fn eer<T: Real>(targets: &[T], nontargets: &[T]) -> Result<Eer<T>> {
    if targets.is_empty() || nontargets.is_empty() {
        return Err(Error::InsufficientData(format!(
            "EER needs both trial kinds, found {} targets and {} nontargets",
            targets.len(),
            nontargets.len()
        )));
    }
    if !targets.iter().chain(nontargets).all(|s| s.is_finite()) {
        return Err(Error::NonFinite("trial scores".into()));
    }
    let mut tg: Vec<T> = targets.to_vec();
    let mut nt: Vec<T> = nontargets.to_vec();
    tg.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nt.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n_t = tg.len() as f64;
    let n_n = nt.len() as f64;

    // merged sweep over unique scores, ascending
    let mut points: Vec<(T, f64, f64)> = Vec::with_capacity(tg.len() + nt.len() + 1);
    let (mut i, mut j) = (0, 0);
    while i < tg.len() || j < nt.len() {
        let theta = match (tg.get(i), nt.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        // below theta: i targets rejected, j nontargets already rejected
        points.push((theta, (n_n - j as f64) / n_n, i as f64 / n_t));
        while i < tg.len() && tg[i] == theta {
            i += 1;
        }
        while j < nt.len() && nt[j] == theta {
            j += 1;
        }
    }
    points.push((T::infinity(), 0.0, 1.0));

    for k in 0..points.len() - 1 {
        let (th0, far0, frr0) = points[k];
        let (th1, far1, frr1) = points[k + 1];
        let d0 = frr0 - far0;
        let d1 = frr1 - far1;
        if d0 <= 0.0 && d1 >= 0.0 {
            let denom = d0 - d1;
            let t = if denom == 0.0 { 0.0 } else { d0 / denom };
            let eer = far0 + t * (far1 - far0);
            let threshold = if th1.is_infinite() {
                th0
            } else {
                th0 + T::lit(t) * (th1 - th0)
            };
            return Ok(Eer { eer, threshold });
        }
    }
    unreachable!("FRR − FAR goes from −1 to +1")
}

/// EER of scores aligned with `trials`.
pub fn eer_from_trials<T: Real>(trials: &TrialList, scores: &[T]) -> Result<Eer<T>> {
    if trials.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: trials.len(),
            found: scores.len(),
        });
    }
    let mut tg = Vec::new();
    let mut nt = Vec::new();
    for (t, &s) in trials.trials.iter().zip(scores) {
        if t.target {
            tg.push(s);
        } else {
            nt.push(s);
        }
    }
    eer(&tg, &nt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use proptest::prelude::*;

    /// Counts errors directly at every score, quadratic time.
    fn brute_force(tg: &[f64], nt: &[f64]) -> f64 {
        let mut thetas: Vec<f64> = tg.iter().chain(nt).copied().collect();
        thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        thetas.dedup();
        let rates = |th: f64| {
            let far = nt.iter().filter(|&&s| s >= th).count() as f64 / nt.len() as f64;
            let frr = tg.iter().filter(|&&s| s < th).count() as f64 / tg.len() as f64;
            (far, frr)
        };
        let mut ops: Vec<(f64, f64)> = thetas.iter().map(|&t| rates(t)).collect();
        ops.push((0.0, 1.0));
        for w in ops.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (d0, d1) = (a.1 - a.0, b.1 - b.0);
            if d0 <= 0.0 && d1 >= 0.0 {
                let t = if d0 == d1 { 0.0 } else { d0 / (d0 - d1) };
                return a.0 + t * (b.0 - a.0);
            }
        }
        panic!("no crossing");
    }

    #[test]
    fn perfect_separation() {
        let e = eer(&[1.0, 1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(e.eer, 0.0);
        assert_eq!(e.threshold, 1.0);
    }

    #[test]
    fn identical_lists_are_chance() {
        let s = [0.3, -1.0, 2.0, 0.3];
        assert_eq!(eer(&s, &s).unwrap().eer, 0.5);
        assert_eq!(eer(&[0.7], &[0.7]).unwrap().eer, 0.5);
    }

    #[test]
    fn fixed_ten_trials() {
        let tg = [0.9, 0.8, 0.4, 0.75, 0.3];
        let nt = [0.1, 0.5, 0.35, 0.2, 0.85];
        let e = eer(&tg, &nt).unwrap();
        assert_eq!(e.eer, brute_force(&tg, &nt));
        assert_eq!(e.eer, 0.4);
    }

    #[test]
    fn needs_both_kinds() {
        assert!(eer::<f64>(&[], &[1.0]).is_err());
        assert!(eer::<f64>(&[1.0], &[]).is_err());
        assert!(eer(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn random_lists_match_brute_force() {
        let mut rng = Rng::new(17);
        for _ in 0..200 {
            let nt_len = 1 + rng.below(30);
            let tg_len = 1 + rng.below(30);
            // coarse grid so ties are common
            let tg: Vec<f64> = (0..tg_len).map(|_| (rng.normal::<f64>() * 4.0 + 3.0).round()).collect();
            let nt: Vec<f64> = (0..nt_len).map(|_| (rng.normal::<f64>() * 4.0).round()).collect();
            assert_eq!(eer(&tg, &nt).unwrap().eer, brute_force(&tg, &nt));
        }
    }

    proptest! {
        #[test]
        fn bounded_and_monotone_invariant(
            tg in proptest::collection::vec(-5.0f64..5.0, 1..40),
            nt in proptest::collection::vec(-5.0f64..5.0, 1..40),
        ) {
            let e = eer(&tg, &nt).unwrap().eer;
            prop_assert!((0.0..=1.0).contains(&e));
            let f = |x: &f64| x.powi(3) * 2.0 + x.exp();
            let tg2: Vec<f64> = tg.iter().map(f).collect();
            let nt2: Vec<f64> = nt.iter().map(f).collect();
            // the map must stay injective in floating point for the claim to hold
            let distinct = |v: Vec<f64>| {
                let mut v = v;
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v.len()
            };
            let all: Vec<f64> = tg.iter().chain(&nt).copied().collect();
            let all2: Vec<f64> = tg2.iter().chain(&nt2).copied().collect();
            prop_assume!(distinct(all) == distinct(all2));
            prop_assert_eq!(eer(&tg2, &nt2).unwrap().eer, e);
        }
    }
}
