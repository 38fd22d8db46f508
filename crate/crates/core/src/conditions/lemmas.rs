//! Finite-range checks of the prime-sum estimates.
//!
//! The two inequality chains below hold for every `x` and are asserted.
//! The packaged lemma conclusions only hold beyond thresholds such as
//! `x >= e^{16/(1-t)^2}`; they are evaluated and reported.

use rayon::prelude::*;
use serde::Serialize;

use crate::numeric::{compensated_sum, le_rel};
use crate::sequence::{
    BumpFunction, PrimeTable, SequenceError, SidelengthFamily, BUMP_DERIVATIVE_BOUND,
};

/// `A = Σ_{n<=x} p_n^{-t}` and the three successive upper bounds obtained by
/// splitting `[1, x]` at `x^{3/4}`.
#[derive(Debug, Clone, Serialize)]
pub struct UpperChain {
    pub a: f64,
    /// `2^{-t} + (log 2)^{-t} Σ_{2<=n<=x^{3/4}} n^{-t} + (4/3)^t (log x)^{-t} Σ_{x^{3/4}<n<=x} n^{-t}`
    pub b: f64,
    /// `B` with both sums replaced by `∫_1^{x^{3/4}}` and `∫_2^x`.
    pub c: f64,
    /// `2^{-t} + x^{3(1-t)/4} / ((1-t)(log 2)^t) + (4/3)^t x^{1-t} / ((1-t)(log x)^t)`
    pub d: f64,
    pub holds: bool,
}

/// `A` and the successive lower bounds from `p_n < n(log n + log log n)`.
#[derive(Debug, Clone, Serialize)]
pub struct LowerChain {
    pub a: f64,
    /// `0.7 Σ_{6<=n<=x} (n log n)^{-t}`
    pub l1: f64,
    /// `0.7 (log x)^{-t} Σ_{6<=n<=x} n^{-t}`
    pub l2: f64,
    /// `0.7 (log x)^{-t} ∫_6^x u^{-t} du`
    pub l3: f64,
    /// `7(x^{1-t} − 6^{1-t}) / (10(1-t)(log x)^t)`
    pub l4: f64,
    /// `min_{6<=n<=x} 1/(1 + log log n / log n)`, which must exceed 7/10.
    pub min_ratio: f64,
    pub holds: bool,
}

/// A two-sided estimate evaluated at a sample point.
#[derive(Debug, Clone, Serialize)]
pub struct Conclusion {
    /// Whether the sample lies in the range where the estimate is proved.
    pub in_range: bool,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub holds: bool,
}

impl Conclusion {
    fn strict(in_range: bool, lower: f64, value: f64, upper: f64) -> Self {
        Conclusion {
            in_range,
            lower,
            value,
            upper,
            holds: lower < value && value < upper,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaRow {
    pub t: f64,
    pub x: u64,
    pub upper_chain: UpperChain,
    pub lower_chain: LowerChain,
    /// `7/20 X < Σ_{n<=x} p_n^{-t} < 10/3 X`, `X = x^{1-t}/((1-t)(log x)^t)`.
    pub partial_sum_bounds: Conclusion,
    /// `7/40 X < Σ_{n<=x-1} p_n^{-t} < 20/3 X`.
    pub shifted_partial_sum_bounds: Conclusion,
    /// Tail bounds for exponent `2t`; `value` is the enclosure midpoint and
    /// `holds` requires the whole enclosure inside the bounds.
    pub tail_bounds: Conclusion,
    /// `7/40 n/((1-t) p_n^t) < Σ_{k<n} p_k^{-t} < 20/3 · 2^t n/((1-t) p_n^t)`.
    pub partial_sum_by_prime: Conclusion,
    /// `(1-2^{1-s}) n / (2^{2s}(s-1) p_n^s) < Σ_{k>=n} p_k^{-s} < 2^{1+s} n/((s-1) p_n^s)`, `s = 2t`.
    pub tail_by_prime: Conclusion,
}

impl LemmaRow {
    pub fn chains_hold(&self) -> bool {
        self.upper_chain.holds && self.lower_chain.holds
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeBoundsReport {
    pub checked: u64,
    /// Indices with `p_n <= n log n`.
    pub lower_exceptions: Vec<u64>,
    /// Indices `n >= 6` with `p_n >= n(log n + log log n)`.
    pub upper_exceptions: Vec<u64>,
}

impl PrimeBoundsReport {
    pub fn holds(&self) -> bool {
        self.lower_exceptions.is_empty() && self.upper_exceptions.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub prime_bounds: PrimeBoundsReport,
    pub rows: Vec<LemmaRow>,
}

impl LemmaReport {
    /// Whether every asserted inequality holds.
    pub fn asserted_hold(&self) -> bool {
        self.prime_bounds.holds() && self.rows.iter().all(LemmaRow::chains_hold)
    }
}

/// `n log n < p_n` for every tabulated `n`, and `p_n < n(log n + log log n)`
/// for `n >= 6`.
pub fn check_prime_bounds(table: &PrimeTable) -> PrimeBoundsReport {
    const CHUNK: usize = 1 << 16;
    let p = table.as_slice();
    let (lower, upper): (Vec<Vec<u64>>, Vec<Vec<u64>>) = p
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for (k, &q) in chunk.iter().enumerate() {
                let n = (c * CHUNK + k + 1) as u64;
                let x = n as f64;
                let l = x.ln();
                let q = q as f64;
                if q <= x * l {
                    lo.push(n);
                }
                if n >= 6 && q >= x * (l + l.ln()) {
                    hi.push(n);
                }
            }
            (lo, hi)
        })
        .unzip();
    PrimeBoundsReport {
        checked: p.len() as u64,
        lower_exceptions: lower.into_iter().flatten().collect(),
        upper_exceptions: upper.into_iter().flatten().collect(),
    }
}

fn power_sum(range: std::ops::RangeInclusive<u64>, t: f64) -> f64 {
    compensated_sum(range.map(|n| (n as f64).powf(-t)))
}

/// `∫_a^b u^{-t} du`.
fn power_integral(a: f64, b: f64, t: f64) -> f64 {
    (b.powf(1.0 - t) - a.powf(1.0 - t)) / (1.0 - t)
}

fn upper_chain(p: &[u32], t: f64, x: u64) -> UpperChain {
    let xf = x as f64;
    let lx = xf.ln();
    let y = xf.powf(0.75);
    let mut yi = y.floor() as u64;
    while ((yi + 1) as f64) <= y {
        yi += 1;
    }
    let a = compensated_sum(p[..x as usize].iter().map(|&q| (q as f64).powf(-t)));
    let head = 2f64.powf(-t);
    let low_coeff = 2f64.ln().powf(-t);
    let high_coeff = (4.0f64 / 3.0).powf(t) * lx.powf(-t);
    let b = head + low_coeff * power_sum(2..=yi, t) + high_coeff * power_sum(yi + 1..=x, t);
    let c = head + low_coeff * power_integral(1.0, y, t) + high_coeff * power_integral(2.0, xf, t);
    let d = head
        + y.powf(1.0 - t) / ((1.0 - t) * 2f64.ln().powf(t))
        + high_coeff * xf.powf(1.0 - t) / (1.0 - t);
    UpperChain {
        a,
        b,
        c,
        d,
        holds: a <= b && b <= c && c <= d,
    }
}

fn lower_chain(p: &[u32], t: f64, x: u64) -> LowerChain {
    let xf = x as f64;
    let lx = xf.ln();
    let a = compensated_sum(p[..x as usize].iter().map(|&q| (q as f64).powf(-t)));
    let l1 = 0.7
        * compensated_sum((6..=x).map(|n| {
            let nf = n as f64;
            (nf * nf.ln()).powf(-t)
        }));
    let l2 = 0.7 * lx.powf(-t) * power_sum(6..=x, t);
    let l3 = 0.7 * lx.powf(-t) * power_integral(6.0, xf, t);
    let l4 = 7.0 * (xf.powf(1.0 - t) - 6f64.powf(1.0 - t)) / (10.0 * (1.0 - t) * lx.powf(t));
    let min_ratio = (6..=x.min(1000))
        .map(|n| {
            let l = (n as f64).ln();
            1.0 / (1.0 + l.ln() / l)
        })
        .fold(f64::INFINITY, f64::min);
    // l3 and l4 are the same closed form; compare them up to rounding.
    let holds = a > l1 && l1 >= l2 && l2 >= l3 && le_rel(l4, l3, 1e-12) && min_ratio > 0.7;
    LowerChain {
        a,
        l1,
        l2,
        l3,
        l4,
        min_ratio,
        holds,
    }
}

fn row(fam: &SidelengthFamily, t: f64, x: u64) -> Result<LemmaRow, SequenceError> {
    let table = fam.prime_table().expect("prime family");
    let p = table.as_slice();
    let available = p.len() as u64;
    if x > available || x < 6 {
        return Err(SequenceError::IndexBeyondSieve {
            index: x,
            available,
        });
    }
    let xf = x as f64;
    let lx = xf.ln();
    let big_x = xf.powf(1.0 - t) / ((1.0 - t) * lx.powf(t));
    let threshold = 16.0 / (1.0 - t).powi(2);

    let upper = upper_chain(p, t, x);
    let lower = lower_chain(p, t, x);
    let a = upper.a;
    let a_shift = a - (p[x as usize - 1] as f64).powf(-t);

    let s = 2.0 * t;
    let tail = fam.tail_sum(x, s)?;
    let tail_lo = (1.0 - 2f64.powf(1.0 - s)) * xf.powf(1.0 - s)
        / (2f64.powf(2.0 * s) * (s - 1.0) * lx.powf(s));
    let tail_hi = 2.0 * xf.powf(1.0 - s) / ((s - 1.0) * lx.powf(s));
    let tail_range = xf >= 6.0 && xf >= 1.0 / (1.0 - 2f64.powf(-1.0 / (s - 1.0)));
    let tail_bounds = Conclusion {
        in_range: tail_range,
        lower: tail_lo,
        value: tail.value,
        upper: tail_hi,
        holds: tail_lo <= tail.lower && tail.upper <= tail_hi,
    };

    let pn = p[x as usize - 1] as f64;
    let partial_by_prime = Conclusion::strict(
        xf.ln() >= 2f64.ln() + threshold,
        7.0 / 40.0 * xf / ((1.0 - t) * pn.powf(t)),
        a_shift,
        20.0 / 3.0 * 2f64.powf(t) * xf / ((1.0 - t) * pn.powf(t)),
    );
    let by_prime_lo =
        (1.0 - 2f64.powf(1.0 - s)) * xf / (2f64.powf(2.0 * s) * (s - 1.0) * pn.powf(s));
    let by_prime_hi = 2f64.powf(1.0 + s) * xf / ((s - 1.0) * pn.powf(s));
    let tail_by_prime = Conclusion {
        in_range: tail_range,
        lower: by_prime_lo,
        value: tail.value,
        upper: by_prime_hi,
        holds: by_prime_lo < tail.lower && tail.upper < by_prime_hi,
    };

    Ok(LemmaRow {
        t,
        x,
        upper_chain: upper,
        lower_chain: lower,
        partial_sum_bounds: Conclusion::strict(
            lx >= threshold,
            7.0 / 20.0 * big_x,
            a,
            10.0 / 3.0 * big_x,
        ),
        shifted_partial_sum_bounds: Conclusion::strict(
            lx >= 2f64.ln() + threshold,
            7.0 / 40.0 * big_x,
            a_shift,
            20.0 / 3.0 * big_x,
        ),
        tail_bounds,
        partial_sum_by_prime: partial_by_prime,
        tail_by_prime,
    })
}

/// Evaluates every `(t, x)` sample against a prime family whose table covers
/// the largest `x`.
pub fn check_prime_sum_lemmas(
    fam: &SidelengthFamily,
    t_values: &[f64],
    x_values: &[u64],
) -> Result<LemmaReport, SequenceError> {
    let table = fam
        .prime_table()
        .ok_or_else(|| SequenceError::InvalidFamily("lemma checks need the prime family".into()))?;
    let grid: Vec<(f64, u64)> = t_values
        .iter()
        .flat_map(|&t| x_values.iter().map(move |&x| (t, x)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(t, x)| row(fam, t, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LemmaReport {
        prime_bounds: check_prime_bounds(table),
        rows,
    })
}

/// Checks of the smooth prime interpolation `f(x) = p_n + φ(x − n − ½)(p_{n+1} − p_n)`.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothExtensionReport {
    /// Integers `n <= up_to` were checked for `f(n) = p_n` exactly.
    pub up_to: u64,
    pub mismatches: Vec<u64>,
    /// `max φ'` over a uniform grid on `[-1/6, 1/6]`.
    pub bump_max_derivative: f64,
    pub grid_points: usize,
    /// Sampled points where `f'(x) > 7 (p_{n+1} − p_n)`.
    pub derivative_samples: usize,
    pub derivative_violations: Vec<f64>,
}

impl SmoothExtensionReport {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
            && self.derivative_violations.is_empty()
            && self.bump_max_derivative < BUMP_DERIVATIVE_BOUND
    }
}

/// Evaluates the smooth extension at every integer up to `up_to`, scans
/// `φ'` on `grid_points` points and samples `f'` at `per_unit` points in
/// every unit interval up to `up_to`.
pub fn check_smooth_extension(
    fam: &SidelengthFamily,
    up_to: u64,
    grid_points: usize,
    per_unit: usize,
) -> Result<SmoothExtensionReport, SequenceError> {
    let table = fam
        .prime_table()
        .ok_or_else(|| SequenceError::InvalidFamily("needs the prime family".into()))?;
    let p = table.as_slice();
    if up_to + 1 > p.len() as u64 {
        return Err(SequenceError::IndexBeyondSieve {
            index: up_to + 1,
            available: p.len() as u64,
        });
    }
    let mut mismatches = Vec::new();
    for n in 1..=up_to {
        if fam.eval_smooth(n as f64)? != p[n as usize - 1] as f64 {
            mismatches.push(n);
        }
    }
    let phi = BumpFunction;
    let bump_max_derivative = (0..grid_points)
        .map(|k| phi.derivative(-1.0 / 6.0 + k as f64 / (grid_points - 1) as f64 / 3.0))
        .fold(0.0, f64::max);
    let mut derivative_samples = 0;
    let mut derivative_violations = Vec::new();
    for n in 1..up_to {
        let gap = (p[n as usize] - p[n as usize - 1]) as f64;
        for k in 0..per_unit {
            let x = n as f64 + (k as f64 + 0.5) / per_unit as f64;
            derivative_samples += 1;
            if fam.derivative(x)? > BUMP_DERIVATIVE_BOUND * gap {
                derivative_violations.push(x);
            }
        }
    }
    Ok(SmoothExtensionReport {
        up_to,
        mismatches,
        bump_max_derivative,
        grid_points,
        derivative_samples,
        derivative_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_minimum_exceeds_seven_tenths() {
        let l = 6f64.ln();
        let r = 1.0 / (1.0 + l.ln() / l);
        assert!((r - 0.7544).abs() < 1e-4);
        // log log n / log n peaks at log n = e, so the ratio is at least 1/(1 + 1/e).
        let floor = 1.0 / (1.0 + (-1.0f64).exp());
        let fam = SidelengthFamily::prime_up_to(20_000).unwrap();
        let row = &check_prime_sum_lemmas(&fam, &[0.6], &[1000]).unwrap().rows[0];
        assert!(row.lower_chain.min_ratio >= floor - 1e-15);
        assert!((row.lower_chain.min_ratio - floor).abs() < 1e-3);
        assert!(floor > 0.7);
    }

    #[test]
    fn sixth_prime_below_upper_bound() {
        let x = 6f64;
        let bound = x * (x.ln() + x.ln().ln());
        assert!(13.0 < bound && (bound - 14.25).abs() < 0.01);
    }

    #[test]
    fn chains_at_ten_thousand() {
        let fam = SidelengthFamily::prime_up_to(200_000).unwrap();
        let report = check_prime_sum_lemmas(&fam, &[0.75], &[10_000]).unwrap();
        let r = &report.rows[0];
        assert!(r.upper_chain.holds, "{:?}", r.upper_chain);
        assert!(r.lower_chain.holds, "{:?}", r.lower_chain);
        // Independent evaluation of the first link.
        let p = fam.prime_table().unwrap().as_slice();
        let a: f64 = p[..10_000].iter().map(|&q| (q as f64).powf(-0.75)).sum();
        let y = 10_000f64.powf(0.75);
        let mut b = 2f64.powf(-0.75);
        for n in 2..=10_000u64 {
            let nf = n as f64;
            if nf <= y {
                b += 2f64.ln().powf(-0.75) * nf.powf(-0.75);
            } else {
                b += (4.0f64 / 3.0).powf(0.75) * 10_000f64.ln().powf(-0.75) * nf.powf(-0.75);
            }
        }
        assert!((r.upper_chain.a - a).abs() < 1e-12 * a);
        assert!((r.upper_chain.b - b).abs() < 1e-12 * b);
        assert!(a <= b);
        assert!(report.prime_bounds.holds());
    }

    #[test]
    fn smooth_extension_small() {
        let fam = SidelengthFamily::prime_up_to(2000).unwrap();
        let r = check_smooth_extension(&fam, 200, 10_001, 16).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.bump_max_derivative > 6.4 && r.bump_max_derivative < 7.0);
    }
}
