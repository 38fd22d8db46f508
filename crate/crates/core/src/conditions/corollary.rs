//! Explicit lower bounds for `M` and `N0` for the arithmetic-progression
//! and prime families, evaluated in log space.

use serde::Serialize;

use crate::numeric::LogValue;

/// One argument of a `max { ... }`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundTerm {
    pub label: &'static str,
    pub value: LogValue,
}

impl BoundTerm {
    fn new(label: &'static str, ln: f64) -> Self {
        BoundTerm {
            label,
            value: LogValue::from_ln(ln),
        }
    }
}

/// `M_min`, `N0_min` and the terms they are maxima of.
#[derive(Debug, Clone, Serialize)]
pub struct CorollaryBounds {
    pub t: f64,
    pub m_terms: Vec<BoundTerm>,
    /// `⌈max m_terms⌉`, in log space.
    pub m_min: LogValue,
    /// `m_min` when it fits in a `u64`.
    pub m_min_exact: Option<u64>,
    pub n0_terms: Vec<BoundTerm>,
    pub n0_min: LogValue,
}

impl CorollaryBounds {
    /// `⌈log10 N0_min⌉`.
    pub fn n0_log10_ceil(&self) -> i64 {
        self.n0_min.log10().ceil() as i64
    }

    pub fn dominant_m_term(&self) -> &BoundTerm {
        dominant(&self.m_terms)
    }

    pub fn dominant_n0_term(&self) -> &BoundTerm {
        dominant(&self.n0_terms)
    }
}

fn dominant(terms: &[BoundTerm]) -> &BoundTerm {
    terms.iter().fold(
        &terms[0],
        |best, t| if t.value.ln > best.value.ln { t } else { best },
    )
}

fn max_ln(terms: &[BoundTerm]) -> f64 {
    dominant(terms).value.ln
}

/// Rounds `e^ln` up to an integer, staying in log space when it does not
/// fit in a `u64`.
fn ceil_ln(ln: f64) -> (f64, Option<u64>) {
    if ln < 63.0 * std::f64::consts::LN_2 {
        let v = ln.exp();
        // Guard against exp rounding below an exact integer.
        let mut c = v.ceil();
        if c < v {
            c += 1.0;
        }
        let c = c.max(1.0) as u64;
        ((c as f64).ln(), Some(c))
    } else {
        (ln, None)
    }
}

/// `ln(e^a − e^b)` for `a > b`.
fn ln_sub(a: f64, b: f64) -> f64 {
    a + (-(b - a).exp()).ln_1p()
}

/// `M` and `N0` lower bounds for squares of side `(qn + r)^{-t}`.
pub fn corollary31_bounds(q: f64, r: f64, t: f64) -> CorollaryBounds {
    let u = (1.0 - t).powi(2);
    let s = t * (2.0 - t);
    let ln2 = std::f64::consts::LN_2;
    let m_terms = vec![
        BoundTerm::new(
            "4^{1/(1-t)} (2(2t-1)/(1-t)^2)^{2/(t(1-t))}",
            4f64.ln() / (1.0 - t) + 2.0 / (t * (1.0 - t)) * (2.0 * (2.0 * t - 1.0) / u).ln(),
        ),
        BoundTerm::new(
            "(50 (11/10)^{t(2-t)})^{2/(1-t)}",
            2.0 / (1.0 - t) * (50f64.ln() + s * 1.1f64.ln()),
        ),
    ];
    let (ln_m, m_exact) = ceil_ln(max_ln(&m_terms));

    let ln_264 = 1.0 / t * (264f64.ln() + 2.0 * ln_m);
    let a2 = if r == 0.0 {
        f64::NEG_INFINITY
    } else {
        (2.0 * r).ln() - q.ln() - ln_sub(ln_264, 2f64.ln())
    };
    let two_over = (2.0 / (q * (2.0 * t - 1.0))).ln();
    let n0_terms = vec![
        BoundTerm::new("4752 M^4", 4752f64.ln() + 4.0 * ln_m),
        BoundTerm::new("2r / (q((264 M^2)^{1/t} - 2))", a2),
        BoundTerm::new(
            "(10 q (2q)^t M)^{1/(1-t)}",
            (10f64.ln() + q.ln() + t * (2.0 * q).ln() + ln_m) / (1.0 - t),
        ),
        BoundTerm::new("2^{1/(1-t)^2} (q+r)/q", ln2 / u + ((q + r) / q).ln()),
        BoundTerm::new(
            "q^{-1} (q(1-t)^2 / (q+r)^{t(2-t)})^{1/(1-t)^2}",
            -q.ln() + (q.ln() + u.ln() - s * (q + r).ln()) / u,
        ),
        BoundTerm::new(
            "1 / (1 - 2^{-1/(2t-1)})",
            -(-(-ln2 / (2.0 * t - 1.0)).exp()).ln_1p(),
        ),
        BoundTerm::new(
            "q^{-1} (2q(1-t)^2)^{2/t} (2/(q(2t-1)))^{(2-t)/t} M^{(1+t)/t}",
            -q.ln()
                + 2.0 / t * (2.0 * q * u).ln()
                + (2.0 - t) / t * two_over
                + (1.0 + t) / t * ln_m,
        ),
        BoundTerm::new(
            "q^{-1} (2/(q(2t-1)))^{1/(2t-1)}",
            -q.ln() + two_over / (2.0 * t - 1.0),
        ),
    ];
    let n0_min = LogValue::from_ln(max_ln(&n0_terms));
    CorollaryBounds {
        t,
        m_terms,
        m_min: LogValue::from_ln(ln_m),
        m_min_exact: m_exact,
        n0_terms,
        n0_min,
    }
}

/// Default gap exponent: `p_{n+1} − p_n <= p_n^θ` is known for θ = 0.525.
pub const DEFAULT_THETA: f64 = 0.525;

/// `M` and `N0` lower bounds for squares of side `p_n^{-t}`, given that the
/// gap hypothesis with exponent `theta` holds from `n_theta` on.
///
/// `theta` only enters through `n_theta`, which is not known explicitly and
/// is therefore an input.
pub fn corollary46_bounds(t: f64, theta: f64, n_theta: f64) -> CorollaryBounds {
    debug_assert!(theta > 0.0 && theta < 1.0);
    let u = (1.0 - t).powi(2);
    let s = t * (2.0 - t);
    let ln2 = std::f64::consts::LN_2;
    let m_inner = 20f64.ln() + (6.0 * t - t * t) * ln2 + (2.0 * t - 1.0).ln()
        - 3f64.ln()
        - u.ln()
        - (1.0 - 2f64.powf(1.0 - 2.0 * t)).ln();
    let m_terms = vec![
        BoundTerm::new(
            "4^{1/(1-t)} (20 2^{6t-t^2} (2t-1) / (3(1-t)^2 (1-2^{1-2t})))^{2/(t(1-t))}",
            4f64.ln() / (1.0 - t) + 2.0 / (t * (1.0 - t)) * m_inner,
        ),
        BoundTerm::new(
            "(50 (6/5)^{t(2-t)})^{2/(1-t)}",
            2.0 / (1.0 - t) * (50f64.ln() + s * 1.2f64.ln()),
        ),
    ];
    let (ln_m, m_exact) = ceil_ln(max_ln(&m_terms));
    let n0_terms = vec![
        BoundTerm::new("N_theta", n_theta.max(1.0).ln()),
        BoundTerm::new("85536 M^5", 85536f64.ln() + 5.0 * ln_m),
        BoundTerm::new("3e18", 3e18f64.ln()),
        BoundTerm::new("2 e^{16/(1-t)^4}", ln2 + 16.0 / (u * u)),
        BoundTerm::new(
            "1 / (1 - 2^{-1/(2t-1)})",
            -(-(-ln2 / (2.0 * t - 1.0)).exp()).ln_1p(),
        ),
        BoundTerm::new("M^{1/(1-t)^2}", ln_m / u),
        BoundTerm::new(
            "(40/7 (1-t)^2)^{2/t} (2^{1+2t}/(2t-1))^{(2-t)/t} M^{(1+t)/t}",
            2.0 / t * (40.0 / 7.0 * u).ln()
                + (2.0 - t) / t * ((1.0 + 2.0 * t) * ln2 - (2.0 * t - 1.0).ln())
                + (1.0 + t) / t * ln_m,
        ),
        BoundTerm::new("e^{1/((2t-1)(1-t))}", 1.0 / ((2.0 * t - 1.0) * (1.0 - t))),
    ];
    let n0_min = LogValue::from_ln(max_ln(&n0_terms));
    CorollaryBounds {
        t,
        m_terms,
        m_min: LogValue::from_ln(ln_m),
        m_min_exact: m_exact,
        n0_terms,
        n0_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_min_is_an_integer_when_small() {
        let b = corollary31_bounds(1.0, 0.0, 0.55);
        let m = b.m_min_exact.expect("fits in u64");
        let raw = b
            .m_terms
            .iter()
            .map(|x| x.value.ln)
            .fold(f64::MIN, f64::max)
            .exp();
        assert!(m as f64 >= raw && (m as f64) < raw + 1.0);
    }

    #[test]
    fn dominant_terms_at_055() {
        let b = corollary31_bounds(1.0, 0.0, 0.55);
        assert_eq!(b.dominant_m_term().label, "(50 (11/10)^{t(2-t)})^{2/(1-t)}");
        assert_eq!(b.dominant_n0_term().label, "4752 M^4");
    }

    #[test]
    fn zero_offset_drops_the_r_term() {
        let b = corollary31_bounds(1.0, 0.0, 0.7);
        assert_eq!(b.n0_terms[1].value.ln, f64::NEG_INFINITY);
        let b = corollary31_bounds(3.0, 1.0, 0.7);
        assert!(b.n0_terms[1].value.ln.is_finite());
    }

    #[test]
    fn prime_bounds_floor_terms() {
        for t in [0.55, 0.75, 0.9] {
            let b = corollary46_bounds(t, DEFAULT_THETA, 1.0);
            assert!(b.n0_min.ln >= 3e18f64.ln());
            assert!(b.n0_min.ln >= 2f64.ln() + 16.0 / (1.0 - t).powi(4));
        }
    }
}

#[cfg(test)]
mod table_tests {
    use super::*;

    /// Published `log10 N0` lower bounds for `f(n) = n`.
    const TABLE: [(f64, i64); 7] = [
        (0.55, 35),
        (0.6, 38),
        (0.7, 50),
        (0.8, 114),
        (0.9, 563),
        (0.95, 2673),
        (0.99, 92863),
    ];

    #[test]
    fn reproduces_published_table() {
        for (t, want) in TABLE {
            let got = corollary31_bounds(1.0, 0.0, t).n0_log10_ceil();
            assert!((got - want).abs() <= 1, "t = {t}: {got} vs {want}");
        }
    }

    #[test]
    fn n0_min_nondecreasing_in_t() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=44 {
            let t = 0.55 + 0.01 * k as f64;
            let ln = corollary31_bounds(1.0, 0.0, t).n0_min.ln;
            assert!(ln >= prev, "t = {t}");
            prev = ln;
        }
    }
}
