//! Dense real vectors used for parameters, gradients and every optimizer buffer.

use serde::{Deserialize, Serialize};

use crate::error::{OptError, Result};

/// Norm floor below which a vector is treated as zero by [`cosine`].
pub const COSINE_NORM_FLOOR: f64 = 1e-30;

/// A flat vector of `f64` with at least one entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

/// Elementwise operation selector for [`elementwise`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementOp {
    Add,
    Sub,
    Mul,
    Div,
    Square,
    Sqrt,
    Abs,
    Clamp,
}

/// Right-hand operand of [`elementwise`]. Unary ops take `None`, `Clamp` takes `Bounds`.
#[derive(Clone, Copy, Debug)]
pub enum Operand<'a> {
    None,
    Vector(&'a ParamVector),
    Scalar(f64),
    Bounds(&'a ParamVector, &'a ParamVector),
}

impl ParamVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(OptError::EmptyVector);
        }
        Ok(ParamVector(data))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "ParamVector dimension must be at least 1");
        ParamVector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        assert!(dim >= 1, "ParamVector dimension must be at least 1");
        ParamVector(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Index of the first NaN or infinite entry, if any.
    pub fn first_nonfinite(&self) -> Option<usize> {
        self.0.iter().position(|x| !x.is_finite())
    }

    pub fn check_finite(&self, context: &'static str) -> Result<()> {
        match self.first_nonfinite() {
            Some(index) => Err(OptError::NonFinite { index, context }),
            None => Ok(()),
        }
    }

    pub fn check_dim(&self, other: &ParamVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(OptError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// Applies `f` pairwise and rejects non-finite results.
    pub fn zip_map(&self, other: &ParamVector, f: impl Fn(f64, f64) -> f64) -> Result<ParamVector> {
        self.check_dim(other)?;
        let out = ParamVector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect());
        out.check_finite("elementwise")?;
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ParamVector> {
        let out = ParamVector(self.0.iter().map(|&a| f(a)).collect());
        out.check_finite("elementwise")?;
        Ok(out)
    }

    pub fn add(&self, other: &ParamVector) -> Result<ParamVector> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ParamVector) -> Result<ParamVector> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ParamVector) -> Result<ParamVector> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn div(&self, other: &ParamVector) -> Result<ParamVector> {
        self.zip_map(other, |a, b| a / b)
    }

    pub fn scale(&self, s: f64) -> Result<ParamVector> {
        self.map(|a| a * s)
    }

    pub fn square(&self) -> Result<ParamVector> {
        self.map(|a| a * a)
    }

    pub fn sqrt(&self) -> Result<ParamVector> {
        self.map(f64::sqrt)
    }

    pub fn abs(&self) -> Result<ParamVector> {
        self.map(f64::abs)
    }

    pub fn clamp(&self, lo: &ParamVector, hi: &ParamVector) -> Result<ParamVector> {
        self.check_dim(lo)?;
        self.check_dim(hi)?;
        let out = ParamVector(
            self.0
                .iter()
                .zip(lo.0.iter().zip(&hi.0))
                .map(|(&y, (&l, &h))| y.max(l).min(h))
                .collect(),
        );
        out.check_finite("clamp")?;
        Ok(out)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(v: ParamVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Builds a vector from a literal slice. Panics on an empty slice.
pub fn pv(values: &[f64]) -> ParamVector {
    ParamVector::new(values.to_vec()).expect("non-empty literal")
}

/// Dispatches one of the elementwise operations.
pub fn elementwise(op: ElementOp, a: &ParamVector, rhs: Operand<'_>) -> Result<ParamVector> {
    let bad = || OptError::InvalidConfig(format!("operand {rhs:?} does not fit {op:?}"));
    match (op, rhs) {
        (ElementOp::Square, Operand::None) => a.square(),
        (ElementOp::Sqrt, Operand::None) => a.sqrt(),
        (ElementOp::Abs, Operand::None) => a.abs(),
        (ElementOp::Clamp, Operand::Bounds(lo, hi)) => a.clamp(lo, hi),
        (ElementOp::Add, Operand::Vector(b)) => a.add(b),
        (ElementOp::Sub, Operand::Vector(b)) => a.sub(b),
        (ElementOp::Mul, Operand::Vector(b)) => a.mul(b),
        (ElementOp::Div, Operand::Vector(b)) => a.div(b),
        (ElementOp::Add, Operand::Scalar(s)) => a.map(|x| x + s),
        (ElementOp::Sub, Operand::Scalar(s)) => a.map(|x| x - s),
        (ElementOp::Mul, Operand::Scalar(s)) => a.scale(s),
        (ElementOp::Div, Operand::Scalar(s)) => a.map(|x| x / s),
        _ => Err(bad()),
    }
}

/// Inner product.
pub fn dot(a: &ParamVector, b: &ParamVector) -> Result<f64> {
    a.check_dim(b)?;
    Ok(dot_slices(&a.0, &b.0))
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm2(a: &ParamVector) -> f64 {
    dot_slices(&a.0, &a.0).sqrt()
}

/// Cosine similarity with the default norm floor.
pub fn cosine(a: &ParamVector, b: &ParamVector) -> Result<f64> {
    cosine_with_floor(a, b, COSINE_NORM_FLOOR)
}

/// Cosine similarity; returns 0 when either norm is below `floor`.
pub fn cosine_with_floor(a: &ParamVector, b: &ParamVector, floor: f64) -> Result<f64> {
    a.check_dim(b)?;
    let (na, nb) = (norm2(a), norm2(b));
    if na < floor || nb < floor {
        return Ok(0.0);
    }
    Ok((dot_slices(&a.0, &b.0) / (na * nb)).clamp(-1.0, 1.0))
}

/// Euclidean distance between two points.
pub fn distance(a: &ParamVector, b: &ParamVector) -> Result<f64> {
    a.check_dim(b)?;
    Ok(a.0
        .iter()
        .zip(&b.0)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn elementwise_examples() {
        assert_eq!(pv(&[5.0, -3.0]).square().unwrap(), pv(&[25.0, 9.0]));
        assert_eq!(pv(&[1.0, 2.0]).add(&pv(&[0.0, 0.0])).unwrap(), pv(&[1.0, 2.0]));
        assert_eq!(pv(&[4.0, 9.0]).div(&pv(&[2.0, 3.0])).unwrap(), pv(&[2.0, 3.0]));
        let r = elementwise(ElementOp::Mul, &pv(&[1.0, -2.0]), Operand::Scalar(3.0)).unwrap();
        assert_eq!(r, pv(&[3.0, -6.0]));
        let r = elementwise(
            ElementOp::Clamp,
            &pv(&[2.0, -2.0, 0.5]),
            Operand::Bounds(&pv(&[-1.0; 3]), &pv(&[1.0; 3])),
        )
        .unwrap();
        assert_eq!(r, pv(&[1.0, -1.0, 0.5]));
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let err = pv(&[1.0, 2.0]).add(&pv(&[1.0])).unwrap_err();
        assert_eq!(err, OptError::DimensionMismatch { left: 2, right: 1 });
        assert!(elementwise(ElementOp::Sqrt, &pv(&[1.0]), Operand::Scalar(1.0)).is_err());
        assert!(dot(&pv(&[1.0]), &pv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn nonfinite_output_names_the_index() {
        let err = pv(&[1.0, 0.0]).div(&pv(&[1.0, 0.0])).unwrap_err();
        assert_eq!(err, OptError::NonFinite { index: 1, context: "elementwise" });
        assert!(ParamVector::new(vec![]).is_err());
    }

    #[test]
    fn dot_norm_cosine_examples() {
        assert_eq!(dot(&pv(&[8.0, -8.0]), &pv(&[5.0, -3.0])).unwrap(), 64.0);
        assert_eq!(dot(&pv(&[1.0, 0.0]), &pv(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(dot(&pv(&[3.0, 7.0]), &ParamVector::zeros(2)).unwrap(), 0.0);
        assert_eq!(norm2(&pv(&[3.0, 4.0])), 5.0);
        assert_eq!(norm2(&ParamVector::zeros(3)), 0.0);
        assert!((norm2(&pv(&[8.0, -8.0])) - 128f64.sqrt()).abs() < 1e-15);
        assert!((cosine(&pv(&[1.0, 1.0]), &pv(&[2.0, 2.0])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&pv(&[1.0, 0.0]), &pv(&[0.0, 1.0])).unwrap(), 0.0);
        let c = cosine(&pv(&[5.0, -3.0]), &pv(&[1.0, 1.0])).unwrap();
        assert!((c - 2.0 / (34f64.sqrt() * 2f64.sqrt())).abs() < 1e-15);
        assert!((c - 0.2425).abs() < 1e-4);
        assert_eq!(cosine(&ParamVector::zeros(2), &pv(&[1.0, 1.0])).unwrap(), 0.0);
    }

    fn vec_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-1e3f64..1e3, n),
            prop::collection::vec(-1e3f64..1e3, n),
        )
    }

    proptest! {
        #[test]
        fn cosine_is_bounded((a, b) in (1usize..12).prop_flat_map(vec_pair)) {
            let c = cosine(&ParamVector::new(a).unwrap(), &ParamVector::new(b).unwrap()).unwrap();
            prop_assert!(c.abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn dot_is_symmetric_and_bilinear(
            (a, b) in (1usize..12).prop_flat_map(vec_pair),
            s in -10.0f64..10.0,
        ) {
            let a = ParamVector::new(a).unwrap();
            let b = ParamVector::new(b).unwrap();
            let ab = dot(&a, &b).unwrap();
            prop_assert_eq!(ab, dot(&b, &a).unwrap());
            let scaled = dot(&a.scale(s).unwrap(), &b).unwrap();
            let scale = (s * ab).abs().max(norm2(&a) * norm2(&b) * s.abs()).max(1.0);
            prop_assert!((scaled - s * ab).abs() <= 1e-12 * scale);
            let sum = dot(&a.add(&b).unwrap(), &b).unwrap();
            let expect = ab + dot(&b, &b).unwrap();
            let scale = (norm2(&a) + norm2(&b)) * norm2(&b) + 1.0;
            prop_assert!((sum - expect).abs() <= 1e-12 * scale);
        }

        #[test]
        fn elementwise_commutes_with_permutation(
            (a, b) in (2usize..10).prop_flat_map(vec_pair),
            rot in 0usize..10,
        ) {
            let n = a.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).rev().collect();
            let permute = |v: &[f64]| ParamVector::new(perm.iter().map(|&i| v[i]).collect()).unwrap();
            let av = ParamVector::new(a.clone()).unwrap();
            let bv = ParamVector::new(b.clone()).unwrap();
            let direct = av.mul(&bv).unwrap().add(&av.abs().unwrap()).unwrap();
            let permuted = permute(&a).mul(&permute(&b)).unwrap().add(&permute(&a).abs().unwrap()).unwrap();
            prop_assert_eq!(permute(direct.as_slice()), permuted);
        }
    }
}
