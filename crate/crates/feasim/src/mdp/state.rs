use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-length vector of finite real coordinates.
///
/// Coordinates are dimensionless; each environment documents its own units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVec(pub Vec<f64>);

impl StateVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState(values));
        }
        Ok(StateVec(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Checks the dimension against an environment's declared state dimension.
    pub fn check_dim(&self, want: usize) -> Result<()> {
        if self.dim() != want {
            return Err(Error::DimensionMismatch {
                want,
                got: self.dim(),
            });
        }
        if self.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState(self.0.clone()));
        }
        Ok(())
    }

    /// Quantizes to an integer key for exact set membership and table lookup.
    ///
    /// Discrete environments produce exact coordinates, so the default
    /// epsilon of 1e-9 only guards against representation noise.
    pub fn key(&self, eps: f64) -> StateKey {
        StateKey(self.0.iter().map(|v| (v / eps).round() as i64).collect())
    }

    /// Total lexicographic order on coordinates. Safe because coordinates are
    /// finite by construction.
    pub fn lex_cmp(&self, other: &StateVec) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.partial_cmp(b).expect("finite coordinates") {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl From<Vec<f64>> for StateVec {
    fn from(values: Vec<f64>) -> Self {
        StateVec(values)
    }
}

impl<const N: usize> From<[f64; N]> for StateVec {
    fn from(values: [f64; N]) -> Self {
        StateVec(values.to_vec())
    }
}

/// Quantized state coordinates, usable as a hash/sort key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(pub Vec<i64>);

impl StateKey {
    /// Canonical text rendering, used by the policy JSON format.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        parts.join(",")
    }

    /// Reconstructs coordinates from the quantization grid.
    pub fn to_state(&self, eps: f64) -> StateVec {
        StateVec(self.0.iter().map(|k| *k as f64 * eps).collect())
    }
}

/// Index into an environment's finite, ordered action table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Validates the index against an environment's action count.
    pub fn check(self, count: usize) -> Result<()> {
        if self.0 >= count {
            return Err(Error::InvalidAction {
                index: self.0,
                count,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_coordinates() {
        assert!(StateVec::new(vec![0.0, f64::NAN]).is_err());
        assert!(StateVec::new(vec![f64::INFINITY]).is_err());
        assert!(StateVec::new(vec![1.0, -2.5]).is_ok());
    }

    #[test]
    fn dimension_check() {
        let s = StateVec::from([1.0, 2.0]);
        assert!(s.check_dim(2).is_ok());
        let err = s.check_dim(3).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { want: 3, got: 2 }));
    }

    #[test]
    fn quantized_keys_are_exact_on_integers() {
        let a = StateVec::from([3.0, -4.0]);
        let b = StateVec::from([3.0, -4.0]);
        assert_eq!(a.key(1e-9), b.key(1e-9));
        assert_ne!(a.key(1e-9), StateVec::from([3.0, -3.0]).key(1e-9));
    }

    #[test]
    fn action_bounds() {
        assert!(ActionId(3).check(4).is_ok());
        assert!(ActionId(4).check(4).is_err());
    }
}
