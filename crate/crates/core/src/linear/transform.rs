use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::{dot, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Whiten,
    Pca,
    Lda,
    Ldan,
    /// Scales each vector to norm `√D`; the projection is the identity.
    LengthNorm,
}

impl TransformKind {
    pub(crate) fn code(self) -> usize {
        match self {
            TransformKind::Whiten => 0,
            TransformKind::Pca => 1,
            TransformKind::Lda => 2,
            TransformKind::Ldan => 3,
            TransformKind::LengthNorm => 4,
        }
    }

    pub(crate) fn from_code(code: usize) -> Option<Self> {
        Some(match code {
            0 => TransformKind::Whiten,
            1 => TransformKind::Pca,
            2 => TransformKind::Lda,
            3 => TransformKind::Ldan,
            4 => TransformKind::LengthNorm,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Whiten => "whiten",
            TransformKind::Pca => "pca",
            TransformKind::Lda => "lda",
            TransformKind::Ldan => "ldan",
            TransformKind::LengthNorm => "lengthnorm",
        }
    }
}

/// `y = P·(x − offset)`, or length normalization for [`TransformKind::LengthNorm`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTransform<T> {
    pub projection: Matrix<T>,
    pub offset: Vec<T>,
    pub kind: TransformKind,
}

/// Scales `x` to norm `√D`.
pub fn length_normalize<T: Real>(x: &[T]) -> Result<Vec<T>> {
    let n = dot(x, x).sqrt();
    if n == T::zero() || !n.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let s = T::from_count(x.len()).sqrt() / n;
    Ok(x.iter().map(|&v| v * s).collect())
}

impl<T: Real> LinearTransform<T> {
    pub fn new(projection: Matrix<T>, offset: Vec<T>, kind: TransformKind) -> Result<Self> {
        if projection.cols() != offset.len() {
            return Err(Error::DimensionMismatch {
                expected: projection.cols(),
                found: offset.len(),
            });
        }
        if projection.rows() > projection.cols() {
            return Err(Error::InvalidConfig(format!(
                "projection has more rows ({}) than columns ({})",
                projection.rows(),
                projection.cols()
            )));
        }
        if !projection.is_finite() || !offset.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("linear transform parameters".into()));
        }
        Ok(Self {
            projection,
            offset,
            kind,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            projection: Matrix::identity(dim),
            offset: vec![T::zero(); dim],
            kind: TransformKind::Pca,
        }
    }

    pub fn length_norm(dim: usize) -> Self {
        Self {
            projection: Matrix::identity(dim),
            offset: vec![T::zero(); dim],
            kind: TransformKind::LengthNorm,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.projection.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn apply_vector(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim(),
                found: x.len(),
            });
        }
        if self.kind == TransformKind::LengthNorm {
            return length_normalize(x);
        }
        let centered: Vec<T> = x.iter().zip(&self.offset).map(|(&a, &b)| a - b).collect();
        Ok(self.projection.matvec(&centered))
    }

    /// Keeps the first `n` output rows.
    pub fn truncate(&self, n: usize) -> Self {
        Self {
            projection: self.projection.top_rows(n),
            offset: self.offset.clone(),
            kind: self.kind,
        }
    }
}

/// Applies a transform to every vector; ids and labels carry through.
pub fn apply<T: Real>(t: &LinearTransform<T>, set: &VectorSet<T>) -> Result<VectorSet<T>> {
    if set.dim() != t.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: t.in_dim(),
            found: set.dim(),
        });
    }
    set.try_map(t.out_dim(), |x| t.apply_vector(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn unit_axis_scaling() {
        assert_eq!(length_normalize(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fixed_point() {
        let x = [1.0, -1.0, 1.0, -1.0];
        assert_eq!(length_normalize(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn random_norms() {
        let mut rng = Rng::new(1);
        for d in 1..30 {
            let x: Vec<f64> = rng.normal_vec(d);
            let y = length_normalize(&x).unwrap();
            assert!((dot(&y, &y).sqrt() - (d as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(matches!(length_normalize(&[0.0, 0.0]), Err(Error::ZeroNorm)));
    }

    #[test]
    fn identity_apply_is_noop() {
        let set = VectorSet::new(
            vec!["a".into(), "b".into()],
            vec![0, 1],
            Matrix::from_rows(&[vec![1.5, -2.0], vec![0.25, 8.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(apply(&LinearTransform::identity(2), &set).unwrap(), set);
    }

    #[test]
    fn shape_checks() {
        assert!(LinearTransform::new(Matrix::<f64>::zeros(3, 2), vec![0.0; 2], TransformKind::Pca).is_err());
        assert!(LinearTransform::new(Matrix::<f64>::zeros(1, 2), vec![0.0; 3], TransformKind::Pca).is_err());
        let t = LinearTransform::<f64>::identity(2);
        assert!(t.apply_vector(&[1.0]).is_err());
    }
}
