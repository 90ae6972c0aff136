//! Named, shaped, flat weight arrays.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor `{name}`: shape {shape:?} implies {expected} elements but data has {actual}")]
    LengthMismatch {
        name: String,
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("tensor `{name}`: dimension {index} is zero")]
    ZeroDim { name: String, index: usize },
    #[error("tensor `{name}`: element {index} is not finite ({value})")]
    NonFinite {
        name: String,
        index: usize,
        value: f64,
    },
}

/// A named tensor stored row-major in 64-bit reals.
///
/// Construction rejects shape/length mismatches, zero dimensions and
/// non-finite entries, so every `Tensor` in circulation is well formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(
        name: impl Into<String>,
        shape: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self, TensorError> {
        let name = name.into();
        if let Some(index) = shape.iter().position(|&d| d == 0) {
            return Err(TensorError::ZeroDim { name, index });
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::LengthMismatch {
                name,
                shape,
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            let value = data[index];
            return Err(TensorError::NonFinite { name, index, value });
        }
        Ok(Self { name, shape, data })
    }

    /// A rank-1 tensor holding `data`.
    pub fn from_vec(name: impl Into<String>, data: Vec<f64>) -> Result<Self, TensorError> {
        let len = data.len();
        Self::new(name, vec![len], data)
    }

    pub fn zeros(name: impl Into<String>, shape: Vec<usize>) -> Result<Self, TensorError> {
        let len = shape.iter().product();
        Self::new(name, shape, vec![0.0; len])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same name and shape, new contents. `data` must have the same length.
    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            name: self.name.clone(),
            shape: self.shape.clone(),
            data,
        }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / self.data.len() as f64;
        var.sqrt()
    }

    pub fn is_constant(&self) -> bool {
        match self.data.first() {
            Some(&first) => self.data.iter().all(|&v| v == first),
            None => true,
        }
    }
}
