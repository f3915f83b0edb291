use crate::error::{Error, Result};
use crate::scalar::Real;

/// Central-difference gradient of `f` at `x` with step `h`.
///
/// Used as an independent oracle for the analytic backward passes.
pub fn finite_diff_gradient<T, F>(mut f: F, x: &[T], h: T) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T>,
{
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    let two_h = h + h;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = f(&probe)?;
        probe[i] = x[i] - h;
        let minus = f(&probe)?;
        probe[i] = x[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "function value near coordinate {i}"
            )));
        }
        grad.push((plus - minus) / two_h);
    }
    Ok(grad)
}
