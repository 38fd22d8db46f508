//! Sidelength families `f`, their smooth extensions, and power sums.

mod bump;
mod family;
mod sieve;
mod sums;

pub use bump::{BumpFunction, BUMP_DERIVATIVE_BOUND};
pub use family::{FamilySpec, SideLengths, SidelengthFamily, HAUGLAND_C, TWIN_PRIME_CONSTANT};
pub use sieve::{
    enumerate_primes, enumerate_primes_capped, enumerate_twin_primes, enumerate_twin_primes_capped,
    sieve_cap, PrimeTable, DEFAULT_SIEVE_CAP, SIEVE_LIMIT_ENV,
};
pub use sums::{SumEnclosure, EM_TERMS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Precision;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("index {index} lies beyond the sieved table ({available} entries)")]
    IndexBeyondSieve { index: u64, available: u64 },
    #[error("Σ f(n)^-s diverges for s = {s} (need s > 1)")]
    NonConvergent { s: f64 },
    #[error(
        "tail enclosure relative width {relative_width:.3e} exceeds requested {requested:.3e}"
    )]
    EnclosureTooWide { relative_width: f64, requested: f64 },
    #[error("sieve limit {limit} exceeds the configured cap {cap}")]
    LimitTooLarge { limit: u64, cap: u64 },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Run parameters shared by the packers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackParams {
    pub t: f64,
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: u64,
    pub n0: u64,
    pub n_max: u64,
    #[serde(default)]
    pub precision: Precision,
}

impl PackParams {
    /// Validates `1/2 < t < 1`, `M >= 1`, `n0 >= 1` and `n_max >= n0`.
    ///
    /// `n_max == n0` is accepted and describes the empty run.
    pub fn new(t: f64, m: u64, n0: u64, n_max: u64) -> Result<Self, SequenceError> {
        if !(t > 0.5 && t < 1.0) {
            return Err(SequenceError::InvalidArgument(format!(
                "t = {t} must lie in (1/2, 1)"
            )));
        }
        if m == 0 {
            return Err(SequenceError::InvalidArgument(
                "M must be a positive integer".into(),
            ));
        }
        if n0 == 0 {
            return Err(SequenceError::InvalidArgument(
                "n0 must be a positive integer".into(),
            ));
        }
        if n_max < n0 {
            return Err(SequenceError::InvalidArgument(format!(
                "n_max = {n_max} is below n0 = {n0}"
            )));
        }
        Ok(PackParams {
            t,
            delta: 1.0 - t,
            m,
            n0,
            n_max,
            precision: Precision::Double,
        })
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    /// The exponent `t + δt = t(2 - t)` of the budget sums.
    pub fn budget_exponent(&self) -> f64 {
        self.t + self.delta * self.t
    }

    /// The lattice window length `9M²`.
    pub fn window(&self) -> u64 {
        9 * self.m * self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validate() {
        let p = PackParams::new(0.6, 4, 100, 200).unwrap();
        assert_eq!(p.delta, 1.0 - 0.6);
        assert_eq!(p.window(), 144);
        assert!((p.budget_exponent() - 0.84).abs() < 1e-15);
        assert!(PackParams::new(1.2, 4, 100, 200).is_err());
        assert!(PackParams::new(0.5, 4, 100, 200).is_err());
        assert!(PackParams::new(0.6, 0, 100, 200).is_err());
        assert!(PackParams::new(0.6, 4, 100, 99).is_err());
        assert!(PackParams::new(0.6, 4, 100, 100).is_ok());
    }
}
