use std::fmt;

use crate::error::{Error, Result};
use crate::linalg;

/// A point `(q, p)` in phase space.
///
/// Both halves have the same length and every entry is finite; the
/// constructor enforces this, so any `PhaseState` a step map hands back is a
/// usable state.
#[derive(Clone, PartialEq)]
pub struct PhaseState {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        if !q.iter().chain(&p).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("phase state"));
        }
        Ok(PhaseState { q, p })
    }

    /// One-degree-of-freedom convenience constructor.
    pub fn scalar(q: f64, p: f64) -> Result<Self> {
        Self::new(vec![q], vec![p])
    }

    /// Splits a flat `[q.., p..]` vector.
    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "flat phase vector has odd length {}",
                x.len()
            )));
        }
        let n = x.len() / 2;
        Self::new(x[..n].to_vec(), x[n..].to_vec())
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Number of configuration coordinates.
    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.q, self.p)
    }

    /// Momentum-reversed copy `(q, -p)`.
    pub fn reversed(&self) -> Self {
        PhaseState {
            q: self.q.clone(),
            p: self.p.iter().map(|v| -v).collect(),
        }
    }

    /// Max-norm distance between two states of equal dimension.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        linalg::norm_inf(&linalg::sub(&self.q, &other.q))
            .max(linalg::norm_inf(&linalg::sub(&self.p, &other.p)))
    }

    pub(crate) fn expect_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for PhaseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhaseState {{ q: {:?}, p: {:?} }}", self.q, self.p)
    }
}
