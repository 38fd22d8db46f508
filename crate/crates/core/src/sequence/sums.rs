//! Power sums `Σ f(n)^{-s}` for the sidelength families.
//!
//! Affine families use Euler–Maclaurin with an explicit remainder bound.
//! Everything else sums directly up to a cutoff and encloses the rest
//! between two integrals. In log-coordinates those integrands are convex
//! and decreasing, so the trapezoid and midpoint rules give rigorous
//! upper and lower bounds.

use serde::{Deserialize, Serialize};

/// A sum together with a guaranteed enclosure `lower <= true value <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumEnclosure {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SumEnclosure {
    pub fn exact(value: f64, error_bound: f64) -> Self {
        SumEnclosure {
            value,
            lower: value - error_bound,
            upper: value + error_bound,
        }
    }

    pub fn from_bounds(lower: f64, upper: f64) -> Self {
        SumEnclosure {
            value: 0.5 * (lower + upper),
            lower,
            upper,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn relative_width(&self) -> f64 {
        self.width() / self.value.abs()
    }

    pub fn shifted(&self, by: f64) -> Self {
        SumEnclosure {
            value: self.value + by,
            lower: self.lower + by,
            upper: self.upper + by,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `B_{2k}` for `k = 1..=8`.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Number of Euler–Maclaurin correction terms actually applied.
pub const EM_TERMS: usize = 6;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `g(x) = (q x + r)^{-s}` and its derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AffinePower {
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl AffinePower {
    pub fn value(&self, x: f64) -> f64 {
        (self.q * x + self.r).powf(-self.s)
    }

    /// `g^{(m)}(x) = (-q)^m (s)_m (q x + r)^{-s-m}`.
    pub fn derivative(&self, m: usize, x: f64) -> f64 {
        let rising: f64 = (0..m).map(|k| self.s + k as f64).product();
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * self.q.powi(m as i32) * rising * (self.q * x + self.r).powf(-self.s - m as f64)
    }

    /// `∫_a^b g` (b may be infinite when s > 1).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let ua = self.q * a + self.r;
        if b.is_infinite() {
            debug_assert!(self.s > 1.0);
            return ua.powf(1.0 - self.s) / (self.q * (self.s - 1.0));
        }
        let ub = self.q * b + self.r;
        if (self.s - 1.0).abs() < 1e-15 {
            return (ub.ln() - ua.ln()) / self.q;
        }
        (ub.powf(1.0 - self.s) - ua.powf(1.0 - self.s)) / (self.q * (1.0 - self.s))
    }

    /// `Σ_{n >= start} g(n)` by Euler–Maclaurin at `start`; returns the
    /// value and a bound on the remainder. Requires `s > 1`.
    pub fn em_tail(&self, start: f64) -> (f64, f64) {
        let mut total = self.integral(start, f64::INFINITY) + 0.5 * self.value(start);
        for k in 1..=EM_TERMS {
            total -= BERNOULLI_EVEN[k - 1] / factorial(2 * k) * self.derivative(2 * k - 1, start);
        }
        // All odd derivatives share a sign, so the remainder is bounded by
        // the first omitted term.
        let k = EM_TERMS + 1;
        let rem =
            (BERNOULLI_EVEN[k - 1] / factorial(2 * k) * self.derivative(2 * k - 1, start)).abs();
        (total, rem)
    }

    /// `Σ_{n=a}^{b} g(n)` by two-sided Euler–Maclaurin.
    pub fn em_range(&self, a: f64, b: f64) -> (f64, f64) {
        let mut total = self.integral(a, b) + 0.5 * (self.value(a) + self.value(b));
        for k in 1..=EM_TERMS {
            let c = BERNOULLI_EVEN[k - 1] / factorial(2 * k);
            total += c * (self.derivative(2 * k - 1, b) - self.derivative(2 * k - 1, a));
        }
        let k = EM_TERMS + 1;
        let c = (BERNOULLI_EVEN[k - 1] / factorial(2 * k)).abs();
        let rem =
            2.0 * c * (self.derivative(2 * k - 1, a).abs() + self.derivative(2 * k - 1, b).abs());
        (total, rem)
    }

    /// Index from which the Euler–Maclaurin remainder is negligible.
    pub fn em_start(&self) -> u64 {
        // q x + r >= 64 keeps the seventh correction below ~1e-17 relative.
        let x = ((64.0 - self.r) / self.q).ceil().max(1.0);
        x as u64
    }
}

/// Rigorous bracket for `∫_{u0}^∞ h(u) du` where `h` is positive, convex,
/// decreasing, and `h(u) e^{rate·u}` is nonincreasing.
///
/// Trapezoid sums over-estimate and midpoint sums under-estimate convex
/// integrands; the part beyond the last node is bounded by `h(U)/rate`.
pub(crate) fn convex_tail_integral(h: impl Fn(f64) -> f64, u0: f64, rate: f64) -> (f64, f64) {
    debug_assert!(rate > 0.0);
    // Integrate until the integrand has decayed by e^{-45}.
    let span = 45.0 / rate;
    let steps = ((span / 2e-3).ceil() as usize).clamp(1_000, 400_000);
    let step = span / steps as f64;
    let mut trap = crate::numeric::NeumaierSum::new();
    let mut mid = crate::numeric::NeumaierSum::new();
    let mut left = h(u0);
    for k in 0..steps {
        let a = u0 + step * k as f64;
        let right = h(a + step);
        trap.add(0.5 * step * (left + right));
        mid.add(step * h(a + 0.5 * step));
        left = right;
    }
    let beyond = left / rate;
    (mid.value(), trap.value() + beyond)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn em_tail_matches_zeta() {
        // ζ(2) − Σ_{n<64} n^{-2}
        let g = AffinePower {
            q: 1.0,
            r: 0.0,
            s: 2.0,
        };
        let head: f64 = (1..64).map(|n| (n as f64).powi(-2)).sum();
        let (tail, rem) = g.em_tail(64.0);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((head + tail - zeta2).abs() < 1e-15);
        assert!(rem < 1e-20);
    }

    #[test]
    fn em_range_matches_direct_sum() {
        let g = AffinePower {
            q: 2.0,
            r: 1.0,
            s: 0.6,
        };
        let direct: f64 = crate::numeric::compensated_sum((100..=5000).map(|n| g.value(n as f64)));
        let (em, rem) = g.em_range(100.0, 5000.0);
        assert!((em - direct).abs() <= 1e-12 * direct, "{em} vs {direct}");
        assert!(rem < 1e-12 * direct);
    }

    #[test]
    fn affine_derivative_signs() {
        let g = AffinePower {
            q: 3.0,
            r: 1.0,
            s: 1.5,
        };
        for m in 0..8 {
            let d = g.derivative(m, 10.0);
            assert_eq!(d > 0.0, m % 2 == 0);
        }
        let h = 1e-5;
        let fd = (g.value(10.0 + h) - g.value(10.0 - h)) / (2.0 * h);
        assert!((fd - g.derivative(1, 10.0)).abs() < 1e-10);
    }

    #[test]
    fn convex_bracket_contains_closed_form() {
        // ∫_{1}^∞ e^{-u} u^{-2} du = E_2(1) ≈ 0.1484955067759
        let (lo, hi) = convex_tail_integral(|u| (-u).exp() / (u * u), 1.0, 1.0);
        let exact = 0.148_495_506_775_922;
        assert!(lo <= exact && exact <= hi, "[{lo}, {hi}]");
        assert!(hi - lo < 1e-6);
    }
}
