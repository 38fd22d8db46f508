//! Floating-point accumulation and log-space helpers.
//!
//! Long sums (tens of millions of terms) go through an error-free
//! transformation accumulator. [`Precision::Extended`] switches the
//! accumulator to a double-double representation (~106-bit significand)
//! for cross-checking the default path.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Arithmetic mode for long summations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Binary64 with Neumaier compensation.
    #[default]
    Double,
    /// Double-double accumulation.
    Extended,
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!(
                "unknown precision `{other}` (expected double|extended)"
            )),
        }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        self.hi = hi;
        self.lo = lo;
    }

    #[inline]
    pub fn add_dd(&mut self, other: DoubleDouble) {
        let (s, e) = two_sum(self.hi, other.hi);
        let (t, f) = two_sum(self.lo, other.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        self.hi = hi;
        self.lo = lo;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Precision-selected accumulator.
#[derive(Debug, Clone, Copy)]
pub enum Accumulator {
    Compensated(NeumaierSum),
    Extended(DoubleDouble),
}

impl Accumulator {
    pub fn new(precision: Precision) -> Self {
        match precision {
            Precision::Double => Accumulator::Compensated(NeumaierSum::new()),
            Precision::Extended => Accumulator::Extended(DoubleDouble::new()),
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        match self {
            Accumulator::Compensated(s) => s.add(x),
            Accumulator::Extended(s) => s.add(x),
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        match self {
            Accumulator::Compensated(s) => s.value(),
            Accumulator::Extended(s) => s.value(),
        }
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

/// A positive quantity stored by its natural logarithm.
///
/// Parameter bounds reach `10^(10^7)`; they are only ever handled here.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln: f64::NEG_INFINITY,
    };

    pub fn from_ln(ln: f64) -> Self {
        LogValue { ln }
    }

    pub fn from_value(x: f64) -> Self {
        debug_assert!(x >= 0.0);
        LogValue { ln: x.ln() }
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// The value itself when it fits in a finite `f64`.
    pub fn to_f64(&self) -> Option<f64> {
        let v = self.ln.exp();
        v.is_finite().then_some(v)
    }

    /// `(mantissa, exponent)` with `value = mantissa * 10^exponent`, `1 <= mantissa < 10`.
    pub fn mantissa_exponent(&self) -> (f64, i64) {
        if self.ln == f64::NEG_INFINITY {
            return (0.0, 0);
        }
        let l = self.log10();
        let e = l.floor();
        (10f64.powf(l - e), e as i64)
    }

    pub fn max(self, other: LogValue) -> LogValue {
        if other.ln > self.ln {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ln == f64::NEG_INFINITY {
            return write!(f, "0");
        }
        match self.to_f64() {
            Some(v) if v.abs() < 1e6 && v >= 1e-3 => write!(f, "{v:.6}"),
            _ => {
                let (m, e) = self.mantissa_exponent();
                write!(f, "{m:.4}e{e}")
            }
        }
    }
}

/// `a <= b` up to a relative slack of `rel`.
#[inline]
pub fn le_rel(a: f64, b: f64, rel: f64) -> bool {
    a <= b + rel * b.abs().max(a.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_lost_bits() {
        let mut naive = 0.0f64;
        let mut acc = NeumaierSum::new();
        let mut dd = DoubleDouble::new();
        for _ in 0..10_000_000 {
            naive += 0.1;
            acc.add(0.1);
            dd.add(0.1);
        }
        let exact = 1_000_000.0;
        assert!((acc.value() - exact).abs() < 1e-9);
        assert!((dd.value() - exact).abs() < 1e-9);
        assert!((naive - exact).abs() > 1e-6);
    }

    #[test]
    fn neumaier_handles_large_cancellation() {
        let mut acc = NeumaierSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.add(x);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn double_double_tracks_tiny_tail() {
        let mut dd = DoubleDouble::new();
        dd.add(1.0);
        dd.add(1e-20);
        dd.add(-1.0);
        assert_eq!(dd.value(), 1e-20);
    }

    #[test]
    fn log_value_mantissa() {
        let v = LogValue::from_value(3.5e7);
        let (m, e) = v.mantissa_exponent();
        assert_eq!(e, 7);
        assert!((m - 3.5).abs() < 1e-12);
        assert_eq!(LogValue::ZERO.to_f64(), Some(0.0));
    }

    #[test]
    fn precision_parses() {
        assert_eq!("double".parse::<Precision>().unwrap(), Precision::Double);
        assert_eq!(
            "extended".parse::<Precision>().unwrap(),
            Precision::Extended
        );
        assert!("quad".parse::<Precision>().is_err());
    }
}
