//! Smooth step used to interpolate the prime sequence.

/// Upper bound on `sup φ'` used in every derivative estimate. The true
/// maximum is about 6.511.
pub const BUMP_DERIVATIVE_BOUND: f64 = 7.0;

const HALF_WIDTH: f64 = 1.0 / 6.0;

/// The `C^∞` step `φ`: 0 below `-1/6`, 1 above `1/6`, `φ(0) = 1/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BumpFunction;

impl BumpFunction {
    /// `½·exp(1 − 1/(1 − 36x²))` on the closed interval `|x| <= 1/6`,
    /// with the endpoint singularity mapped to 0.
    fn half_kernel(x: f64) -> f64 {
        let d = 1.0 - 36.0 * x * x;
        if d <= 0.0 {
            0.0
        } else {
            0.5 * (1.0 - 1.0 / d).exp()
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        if x < -HALF_WIDTH {
            0.0
        } else if x > HALF_WIDTH {
            1.0
        } else if x <= 0.0 {
            Self::half_kernel(x)
        } else {
            1.0 - Self::half_kernel(x)
        }
    }

    /// Analytic derivative; symmetric about 0.
    pub fn derivative(&self, x: f64) -> f64 {
        if x.abs() >= HALF_WIDTH {
            return 0.0;
        }
        let d = 1.0 - 36.0 * x * x;
        Self::half_kernel(x) * 72.0 * x.abs() / (d * d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_values() {
        let phi = BumpFunction;
        assert_eq!(phi.value(-0.5), 0.0);
        assert_eq!(phi.value(-1.0 / 6.0), 0.0);
        assert_eq!(phi.value(0.0), 0.5);
        assert_eq!(phi.value(1.0 / 6.0), 1.0);
        assert_eq!(phi.value(0.25), 1.0);
        assert_eq!(phi.value(-0.25), 0.0);
    }

    #[test]
    fn symmetric_and_nondecreasing() {
        let phi = BumpFunction;
        let mut prev = 0.0;
        for k in 0..=20_000 {
            let x = -0.2 + 0.4 * k as f64 / 20_000.0;
            let v = phi.value(x);
            assert!(v >= prev, "not monotone at {x}");
            assert!((v + phi.value(-x) - 1.0).abs() < 1e-15);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let phi = BumpFunction;
        let h = 1e-7;
        for k in 1..400 {
            let x = -0.16 + 0.32 * k as f64 / 400.0;
            let fd = (phi.value(x + h) - phi.value(x - h)) / (2.0 * h);
            assert!(
                (fd - phi.derivative(x)).abs() < 1e-5,
                "x={x}: {fd} vs {}",
                phi.derivative(x)
            );
        }
    }
}
