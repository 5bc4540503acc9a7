use crate::error::{Error, Result};

/// One d-dimensional feature vector, typically the output of a frozen
/// feature extractor for a single input signal.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FeatureVector(Vec<f32>);

impl FeatureVector {
    pub fn new(values: Vec<f32>) -> Self {
        FeatureVector(values)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    /// Checks length and finiteness.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.0.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.0.len(),
            });
        }
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFiniteInput { index }),
            None => Ok(()),
        }
    }

    /// Squared Euclidean distance, accumulated in f64.
    pub fn sq_dist(&self, other: &FeatureVector) -> f64 {
        sq_dist_f32(&self.0, &other.0)
    }
}

impl From<Vec<f32>> for FeatureVector {
    fn from(v: Vec<f32>) -> Self {
        FeatureVector(v)
    }
}

impl AsRef<[f32]> for FeatureVector {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

pub(crate) fn sq_dist_f32(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let t = x as f64 - y as f64;
            t * t
        })
        .sum()
}

pub(crate) fn sq_dist_mixed(x: &[f32], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let t = a as f64 - b;
            t * t
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_reports_first_bad_index() {
        let x = FeatureVector::from(vec![1.0, f32::NAN, f32::INFINITY]);
        assert!(matches!(
            x.validate(3),
            Err(Error::NonFiniteInput { index: 1 })
        ));
        assert!(matches!(
            x.validate(4),
            Err(Error::DimensionMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn distance_is_euclidean_squared() {
        let a = FeatureVector::from(vec![0.0, 0.0]);
        let b = FeatureVector::from(vec![3.0, 4.0]);
        assert_eq!(a.sq_dist(&b), 25.0);
    }
}
