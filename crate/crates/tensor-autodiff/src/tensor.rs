//! Dense row-major f64 tensor.

use serde::{Deserialize, Serialize};

use crate::TensorError;

/// Dense n-dimensional array of f64 values in row-major layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self, TensorError> {
        let expect: usize = shape.iter().product();
        if expect != data.len() {
            return Err(TensorError::ShapeMismatch {
                context: "from_vec",
                expected: shape.to_vec(),
                got: vec![data.len()],
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: vec![1],
            data: vec![v],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Reinterprets the buffer under a new shape of equal length.
    pub fn reshaped(&self, shape: &[usize]) -> Result<Self, TensorError> {
        let expect: usize = shape.iter().product();
        if expect != self.data.len() {
            return Err(TensorError::ShapeMismatch {
                context: "reshape",
                expected: shape.to_vec(),
                got: self.shape.clone(),
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    pub fn scalar_value(&self) -> f64 {
        debug_assert_eq!(self.data.len(), 1);
        self.data[0]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[inline]
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[i * self.shape[1] + j]
    }

    #[inline]
    pub fn at3(&self, c: usize, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 3);
        let (h, w) = (self.shape[1], self.shape[2]);
        self.data[(c * h + i) * w + j]
    }

    #[inline]
    pub fn set3(&mut self, c: usize, i: usize, j: usize, v: f64) {
        debug_assert_eq!(self.shape.len(), 3);
        let (h, w) = (self.shape[1], self.shape[2]);
        self.data[(c * h + i) * w + j] = v;
    }

    #[inline]
    pub fn at4(&self, n: usize, c: usize, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 4);
        let (ch, h, w) = (self.shape[1], self.shape[2], self.shape[3]);
        self.data[((n * ch + c) * h + i) * w + j]
    }

    #[inline]
    pub fn set4(&mut self, n: usize, c: usize, i: usize, j: usize, v: f64) {
        debug_assert_eq!(self.shape.len(), 4);
        let (ch, h, w) = (self.shape[1], self.shape[2], self.shape[3]);
        self.data[((n * ch + c) * h + i) * w + j] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise a + s*b, used by optimizers and gradient accumulation.
    pub fn axpy(&mut self, s: f64, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        debug_assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Sums values in an order independent of their input permutation and
/// exactly anti-symmetric under global negation: sort by (|x|, sign)
/// before folding. Used where a reduction must be bit-stable under a
/// group permutation of its inputs.
pub fn stable_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(|a, b| {
        a.abs()
            .partial_cmp(&b.abs())
            .unwrap()
            .then_with(|| a.partial_cmp(b).unwrap())
    });
    values.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Tensor::from_vec(&[2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn stable_sum_is_permutation_invariant() {
        let vals = vec![0.1, -7.25, 3.5e-3, 2.0, -0.1, 9.0, 1e-12];
        let mut a = vals.clone();
        let mut b = vals;
        b.reverse();
        b.swap(0, 3);
        assert_eq!(stable_sum(&mut a).to_bits(), stable_sum(&mut b).to_bits());
    }

    #[test]
    fn stable_sum_negation_antisymmetric() {
        let vals = vec![0.25, -1.5, 0.25, 3.0, -0.75];
        let mut a = vals.clone();
        let mut b: Vec<f64> = vals.iter().map(|v| -v).collect();
        let sa = stable_sum(&mut a);
        let sb = stable_sum(&mut b);
        assert_eq!(sa, -sb);
    }
}
