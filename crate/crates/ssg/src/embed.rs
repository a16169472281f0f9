use serde::{Deserialize, Serialize};

use crate::error::SsgError;

/// Shared embedding dimension: 255 hashed content coordinates plus one STOP
/// coordinate (see [`crate::LexicalEncoder`]).
pub const DEFAULT_DIM: usize = 256;

/// Maximum tolerated deviation of the L2 norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Dense unit-length vector. Every encoder output and every index row is an
/// `EmbeddingVector`; the unit-norm invariant makes inner products directly
/// comparable to the threshold τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f32>", into = "Vec<f32>")]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    /// Wrap an already-normalized vector, enforcing finiteness and unit norm.
    pub fn new(values: Vec<f32>) -> Result<EmbeddingVector, SsgError> {
        if values.is_empty() {
            return Err(SsgError::Embedding("vector must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SsgError::Embedding("vector has a non-finite entry".into()));
        }
        let norm = l2_norm(&values);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SsgError::Embedding(format!("L2 norm {norm} is not 1")));
        }
        Ok(EmbeddingVector(values))
    }

    /// Normalize an arbitrary finite vector to unit length. The zero vector
    /// maps to the fixed fallback direction e₀ so encoders stay total.
    pub fn normalized(mut values: Vec<f32>) -> Result<EmbeddingVector, SsgError> {
        if values.is_empty() {
            return Err(SsgError::Embedding("vector must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SsgError::Embedding("vector has a non-finite entry".into()));
        }
        let norm = l2_norm(&values);
        if norm == 0.0 {
            values.fill(0.0);
            values[0] = 1.0;
            return Ok(EmbeddingVector(values));
        }
        for v in &mut values {
            *v = (f64::from(*v) / norm) as f32;
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    /// Inner product, accumulated in f64 so scores sort stably.
    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| f64::from(a) * f64::from(b))
            .sum()
    }
}

impl TryFrom<Vec<f32>> for EmbeddingVector {
    type Error = String;

    fn try_from(values: Vec<f32>) -> Result<Self, Self::Error> {
        EmbeddingVector::new(values).map_err(|e| e.to_string())
    }
}

impl From<EmbeddingVector> for Vec<f32> {
    fn from(v: EmbeddingVector) -> Vec<f32> {
        v.0
    }
}

fn l2_norm(values: &[f32]) -> f64 {
    values.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt()
}

/// Unit basis vector eᵢ of the given dimension.
pub(crate) fn basis(dim: usize, i: usize) -> EmbeddingVector {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    EmbeddingVector(v)
}
