//! Multi-index arithmetic on N^d and the partial order that defines
//! admissible coefficient supports.
//!
//! The mode lattice is the commutative semi-ring N^d: componentwise addition
//! and multiplication, no additive inverses. Everything downstream (sequence
//! supports, convolution bands, operator bands) is phrased through the
//! componentwise partial order implemented here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible mode number. Keeps n^2 and the denominators n^2 - j
/// exactly representable in both i64 and f64 arithmetic.
pub const MAX_MODE: i64 = 1 << 20;

/// An element of N^d. Entries are stored as signed 64-bit integers but are
/// validated non-negative on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        for &e in &entries {
            if e < 0 {
                return Err(Error::NegativeMode(e));
            }
            if e > MAX_MODE {
                return Err(Error::ModeTooLarge(e));
            }
        }
        if entries.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self(entries))
    }

    /// d=1 convenience constructor.
    pub fn scalar(n: u64) -> Self {
        Self(vec![n as i64])
    }

    /// The multiplicative identity 1 = (1, ..., 1).
    pub fn ones(d: usize) -> Self {
        Self(vec![1; d])
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// |n| = n_1 + ... + n_d.
    pub fn order(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Componentwise n_k^2.
    pub fn elementwise_square(&self) -> Self {
        Self(self.0.iter().map(|&e| e * e).collect())
    }

    /// Componentwise partial order: m <= n iff m_k <= n_k for every k.
    pub fn le(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a <= b))
    }

    /// Componentwise strict order: m < n iff m_k < n_k for every k.
    pub fn lt(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a < b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Componentwise difference; defined whenever other <= self.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !other.le(self)? {
            return Err(Error::Invalid(format!(
                "{:?} - {:?} leaves N^d",
                self.0, other.0
            )));
        }
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect(),
        ))
    }

    /// Scalar broadcast r + n = r*1 + n.
    pub fn broadcast_add(&self, r: i64) -> Self {
        Self(self.0.iter().map(|&e| e + r).collect())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// Frequency vector of the torus: omega_i > 0, one per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::NonPositiveFrequency);
        }
        Ok(Self(omega))
    }

    pub fn scalar(omega: f64) -> Result<Self> {
        Self::new(vec![omega])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// ||omega||^2 = sum of omega_i^2.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum()
    }

    /// omega^2 j = sum_i omega_i^2 j_i.
    pub fn weighted_dot(&self, j: &MultiIndex) -> Result<f64> {
        if self.dim() != j.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: j.dim(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(j.entries())
            .map(|(w, &ji)| w * w * ji as f64)
            .sum())
    }

    /// omega n x = sum_k omega_k n_k x_k (spatial phase).
    pub fn spatial_dot(&self, n: &MultiIndex, x: &[f64]) -> Result<f64> {
        if self.dim() != n.dim() || self.dim() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: n.dim().min(x.len()),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(n.entries())
            .zip(x)
            .map(|((w, &nk), xk)| w * nk as f64 * xk)
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn partial_order() {
        assert!(mi(&[1, 1]).le(&mi(&[2, 3])).unwrap());
        assert!(!mi(&[2, 1]).le(&mi(&[1, 3])).unwrap());
        let n = mi(&[4, 0, 7]);
        assert!(n.le(&n).unwrap());
    }

    #[test]
    fn order_dimension_mismatch() {
        assert!(mi(&[1]).le(&mi(&[1, 2])).is_err());
    }

    #[test]
    fn squares() {
        assert_eq!(mi(&[3]).elementwise_square(), mi(&[9]));
        assert_eq!(mi(&[2, 3]).elementwise_square(), mi(&[4, 9]));
        assert_eq!(mi(&[0]).elementwise_square(), mi(&[0]));
    }

    #[test]
    fn weighted_dot() {
        let w = FrequencyVector::new(vec![1.0]).unwrap();
        assert_eq!(w.weighted_dot(&mi(&[4])).unwrap(), 4.0);
        let w2 = FrequencyVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(w2.weighted_dot(&mi(&[1, 1])).unwrap(), 5.0);
        assert_eq!(w.weighted_dot(&mi(&[0])).unwrap(), 0.0);
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(MultiIndex::new(vec![1, -1]).is_err());
        assert!(FrequencyVector::new(vec![1.0, 0.0]).is_err());
        assert!(FrequencyVector::new(vec![-2.0]).is_err());
    }

    #[test]
    fn difference_stays_in_lattice() {
        let m = mi(&[1, 2]);
        let n = mi(&[3, 2]);
        assert_eq!(n.sub(&m).unwrap(), mi(&[2, 0]));
        assert!(m.sub(&n).is_err());
    }
}
