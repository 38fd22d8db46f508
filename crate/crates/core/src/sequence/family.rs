use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::bump::{BumpFunction, BUMP_DERIVATIVE_BOUND};
use super::sieve::{enumerate_primes, enumerate_twin_primes, PrimeTable};
use super::sums::{convex_tail_integral, AffinePower, SumEnclosure};
use super::SequenceError;
use crate::numeric::{Accumulator, Precision};

/// `Π_{p>=3} (1 - 1/(p-1)^2)`.
pub const TWIN_PRIME_CONSTANT: f64 = 0.660_161_815_846_869_6;

/// Best known admissible constant in the twin-prime counting upper bound
/// (Haugland). Any `C' > HAUGLAND_C` is valid for the twin-prime family.
pub const HAUGLAND_C: f64 = 6.8325;

/// Number of terms summed directly before the analytic remainder takes over
/// for the smooth power-log families.
const POWERLOG_DIRECT_TERMS: u64 = 1 << 20;

/// Largest partial sum evaluated term by term for affine families.
const DIRECT_PARTIAL_LIMIT: u64 = 100_000_000;

/// What a family evaluates, independent of any cached tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    /// `f(n) = q n + r`.
    Ap { q: f64, r: f64 },
    /// `f(n) = p_n`.
    Prime,
    /// `f(n) = n (log n)^2 / (C' Π₂)`; actual sides come from the twin primes.
    TwinPrime { cprime: f64 },
    /// `f(n) = a n (log n)^b`.
    PowerLog { a: f64, b: f64 },
}

impl FamilySpec {
    pub fn validate(&self) -> Result<(), SequenceError> {
        let bad = |m: String| Err(SequenceError::InvalidFamily(m));
        match *self {
            FamilySpec::Ap { q, r } => {
                if !(q.is_finite() && r.is_finite() && r >= 0.0 && q > r) {
                    return bad(format!("ap needs q > r >= 0, got q={q}, r={r}"));
                }
            }
            FamilySpec::Prime => {}
            FamilySpec::TwinPrime { cprime } => {
                if !(cprime.is_finite() && cprime > HAUGLAND_C) {
                    return bad(format!(
                        "twinprime needs cprime > {HAUGLAND_C}, got {cprime}"
                    ));
                }
            }
            FamilySpec::PowerLog { a, b } => {
                if !(a.is_finite() && b.is_finite() && a > 0.0 && b >= 0.0) {
                    return bad(format!("powerlog needs a > 0 and b >= 0, got a={a}, b={b}"));
                }
            }
        }
        Ok(())
    }

    /// `(a, b)` with `f(x) = a x (log x)^b` for the smooth power-log families.
    fn power_log(&self) -> Option<(f64, f64)> {
        match *self {
            FamilySpec::TwinPrime { cprime } => Some((1.0 / (cprime * TWIN_PRIME_CONSTANT), 2.0)),
            FamilySpec::PowerLog { a, b } => Some((a, b)),
            _ => None,
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Ap { q, r } => write!(f, "ap:q={q},r={r}"),
            FamilySpec::Prime => write!(f, "prime"),
            FamilySpec::TwinPrime { cprime } => write!(f, "twinprime:cprime={cprime}"),
            FamilySpec::PowerLog { a, b } => write!(f, "powerlog:a={a},b={b}"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut pairs = Vec::new();
        for item in args.split(',').filter(|x| !x.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                SequenceError::InvalidFamily(format!("expected key=value, got `{item}`"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| SequenceError::InvalidFamily(format!("`{v}` is not a number")))?;
            pairs.push((k.trim().to_string(), v));
        }
        let get = |key: &str| {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| SequenceError::InvalidFamily(format!("`{name}` needs `{key}=`")))
        };
        let allow = |keys: &[&str]| {
            for (k, _) in &pairs {
                if !keys.contains(&k.as_str()) {
                    return Err(SequenceError::InvalidFamily(format!(
                        "unknown key `{k}` for `{name}`"
                    )));
                }
            }
            Ok(())
        };
        let spec = match name {
            "ap" => {
                allow(&["q", "r"])?;
                FamilySpec::Ap {
                    q: get("q")?,
                    r: get("r")?,
                }
            }
            "prime" => {
                allow(&[])?;
                FamilySpec::Prime
            }
            "twinprime" => {
                allow(&["cprime"])?;
                FamilySpec::TwinPrime {
                    cprime: get("cprime")?,
                }
            }
            "powerlog" => {
                allow(&["a", "b"])?;
                FamilySpec::PowerLog {
                    a: get("a")?,
                    b: get("b")?,
                }
            }
            other => {
                return Err(SequenceError::InvalidFamily(format!(
                    "unknown family `{other}`"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// What the lattice packer needs from a sidelength function.
pub trait SideLengths {
    /// `f(n)` at an integer index.
    fn value(&self, n: u64) -> Result<f64, SequenceError>;

    /// The smooth extension `f(x)`.
    fn smooth(&self, x: f64) -> Result<f64, SequenceError>;

    /// An upper bound on `sup f'` over `[lo, hi]`.
    fn max_derivative(&self, lo: f64, hi: f64) -> Result<f64, SequenceError>;

    /// `f(n)^{-t}`.
    fn side(&self, n: u64, t: f64) -> Result<f64, SequenceError> {
        Ok(self.value(n)?.powf(-t))
    }
}

/// A sidelength family with whatever prime tables it needs.
///
/// Tables are immutable once built and shared by `Arc`.
#[derive(Debug, Clone)]
pub struct SidelengthFamily {
    spec: FamilySpec,
    primes: Option<Arc<PrimeTable>>,
    twins: Option<Arc<Vec<u32>>>,
    precision: Precision,
}

/// Upper bound on `p_n` (valid for n >= 6, padded below).
fn prime_upper_bound(n: u64) -> u64 {
    if n < 6 {
        return 15;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64 + 1
}

impl SidelengthFamily {
    pub fn ap(q: f64, r: f64) -> Result<Self, SequenceError> {
        Self::analytic(FamilySpec::Ap { q, r })
    }

    pub fn power_log(a: f64, b: f64) -> Result<Self, SequenceError> {
        Self::analytic(FamilySpec::PowerLog { a, b })
    }

    /// The twin-prime envelope without a twin table.
    pub fn twin_prime(cprime: f64) -> Result<Self, SequenceError> {
        Self::analytic(FamilySpec::TwinPrime { cprime })
    }

    fn analytic(spec: FamilySpec) -> Result<Self, SequenceError> {
        spec.validate()?;
        Ok(SidelengthFamily {
            spec,
            primes: None,
            twins: None,
            precision: Precision::Double,
        })
    }

    /// Primes sieved up to the value `limit`.
    pub fn prime_up_to(limit: u64) -> Result<Self, SequenceError> {
        let table = enumerate_primes(limit)?;
        Ok(Self::prime_from_table(Arc::new(table)))
    }

    /// Primes sieved far enough that `p_{n+1}` is available.
    pub fn prime_covering(n: u64) -> Result<Self, SequenceError> {
        Self::prime_up_to(prime_upper_bound(n + 1))
    }

    pub fn prime_from_table(table: Arc<PrimeTable>) -> Self {
        SidelengthFamily {
            spec: FamilySpec::Prime,
            primes: Some(table),
            twins: None,
            precision: Precision::Double,
        }
    }

    /// Twin-prime family with the twin primes up to `limit` attached as
    /// the side source.
    pub fn twin_prime_with_table(cprime: f64, limit: u64) -> Result<Self, SequenceError> {
        let mut fam = Self::twin_prime(cprime)?;
        fam.twins = Some(Arc::new(enumerate_twin_primes(limit)?));
        Ok(fam)
    }

    /// Twin-prime family whose side table holds at least `n` entries.
    pub fn twin_prime_covering(cprime: f64, n: u64) -> Result<Self, SequenceError> {
        let x = (n.max(16)) as f64;
        let mut limit = (2.0 * x * x.ln().powi(2)).ceil() as u64;
        loop {
            let fam = Self::twin_prime_with_table(cprime, limit)?;
            if fam.twin_table().map_or(0, <[u32]>::len) as u64 >= n {
                return Ok(fam);
            }
            limit *= 2;
        }
    }

    /// Builds the family for `spec`, sieving enough to evaluate every index
    /// up to `coverage` (for twin primes, including the side source).
    pub fn from_spec(spec: FamilySpec, coverage: u64) -> Result<Self, SequenceError> {
        spec.validate()?;
        match spec {
            FamilySpec::Prime => Self::prime_covering(coverage),
            FamilySpec::TwinPrime { cprime } => Self::twin_prime_covering(cprime, coverage),
            _ => Self::analytic(spec),
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn spec(&self) -> FamilySpec {
        self.spec
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn prime_table(&self) -> Option<&PrimeTable> {
        self.primes.as_deref()
    }

    pub fn twin_table(&self) -> Option<&[u32]> {
        self.twins.as_deref().map(Vec::as_slice)
    }

    /// Largest index `n` for which `f(n)` is available, if bounded.
    pub fn max_index(&self) -> Option<u64> {
        self.primes.as_ref().map(|t| t.len() as u64)
    }

    fn prime(&self, n: u64) -> Result<f64, SequenceError> {
        let table = self
            .primes
            .as_ref()
            .ok_or(SequenceError::IndexBeyondSieve {
                index: n,
                available: 0,
            })?;
        table
            .nth(n)
            .map(|p| p as f64)
            .ok_or(SequenceError::IndexBeyondSieve {
                index: n,
                available: table.len() as u64,
            })
    }

    fn check_index(n: u64) -> Result<(), SequenceError> {
        if n == 0 {
            return Err(SequenceError::InvalidArgument("indices start at 1".into()));
        }
        Ok(())
    }

    /// `f(n)`.
    pub fn eval_f(&self, n: u64) -> Result<f64, SequenceError> {
        Self::check_index(n)?;
        match self.spec {
            FamilySpec::Ap { q, r } => Ok(q * n as f64 + r),
            FamilySpec::Prime => self.prime(n),
            _ => {
                let (a, b) = self.spec.power_log().expect("power-log family");
                let x = n as f64;
                Ok(a * x * x.ln().powf(b))
            }
        }
    }

    /// The integer sequence the actual squares are built from: `𝔭_n` for
    /// the twin-prime family, `f(n)` otherwise.
    pub fn side_source(&self, n: u64) -> Result<f64, SequenceError> {
        Self::check_index(n)?;
        match self.spec {
            FamilySpec::TwinPrime { .. } => {
                let twins = self.twins.as_ref().ok_or(SequenceError::IndexBeyondSieve {
                    index: n,
                    available: 0,
                })?;
                twins.get((n - 1) as usize).map(|&p| p as f64).ok_or(
                    SequenceError::IndexBeyondSieve {
                        index: n,
                        available: twins.len() as u64,
                    },
                )
            }
            _ => self.eval_f(n),
        }
    }

    /// First index in `[from, to]` where the twin prime falls below the
    /// envelope `f(n)`, or `None` if `𝔭_n >= f(n)` throughout.
    pub fn twin_domination_failure(
        &self,
        from: u64,
        to: u64,
    ) -> Result<Option<u64>, SequenceError> {
        for n in from.max(1)..=to {
            if self.side_source(n)? < self.eval_f(n)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// The smooth extension. For primes, on `[n, n+1]` this is
    /// `p_n + φ(x − n − 1/2)(p_{n+1} − p_n)`.
    pub fn eval_smooth(&self, x: f64) -> Result<f64, SequenceError> {
        if !(x >= 1.0) {
            return Err(SequenceError::InvalidArgument(format!(
                "smooth extension needs x >= 1, got {x}"
            )));
        }
        match self.spec {
            FamilySpec::Ap { q, r } => Ok(q * x + r),
            FamilySpec::Prime => {
                let n = x.floor() as u64;
                let weight = BumpFunction.value(x - n as f64 - 0.5);
                let pn = self.prime(n)?;
                if weight == 0.0 {
                    return Ok(pn);
                }
                Ok(pn + weight * (self.prime(n + 1)? - pn))
            }
            _ => {
                let (a, b) = self.spec.power_log().expect("power-log family");
                Ok(a * x * x.ln().powf(b))
            }
        }
    }

    /// Analytic `f'(x)`.
    pub fn derivative(&self, x: f64) -> Result<f64, SequenceError> {
        if !(x >= 1.0) {
            return Err(SequenceError::InvalidArgument(format!(
                "derivative needs x >= 1, got {x}"
            )));
        }
        match self.spec {
            FamilySpec::Ap { q, .. } => Ok(q),
            FamilySpec::Prime => {
                let n = x.floor() as u64;
                let slope = BumpFunction.derivative(x - n as f64 - 0.5);
                if slope == 0.0 {
                    return Ok(0.0);
                }
                Ok(slope * (self.prime(n + 1)? - self.prime(n)?))
            }
            _ => {
                let (a, b) = self.spec.power_log().expect("power-log family");
                Ok(powerlog_derivative(a, b, x))
            }
        }
    }

    /// Upper bound on `sup f'` over `[lo, hi]`.
    ///
    /// For primes this is `7 · max(p_{n+1} − p_n)` over the unit intervals
    /// `[n, n+1]` meeting `[lo, hi]`.
    pub fn max_derivative(&self, lo: f64, hi: f64) -> Result<f64, SequenceError> {
        if !(lo >= 1.0 && hi > lo) {
            return Err(SequenceError::InvalidArgument(format!(
                "need 1 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
        match self.spec {
            FamilySpec::Ap { q, .. } => Ok(q),
            FamilySpec::Prime => {
                let first = lo.floor() as u64;
                let last = (hi.ceil() as u64 - 1).max(first);
                let table = self
                    .primes
                    .as_ref()
                    .ok_or(SequenceError::IndexBeyondSieve {
                        index: last + 1,
                        available: 0,
                    })?;
                if last + 1 > table.len() as u64 {
                    return Err(SequenceError::IndexBeyondSieve {
                        index: last + 1,
                        available: table.len() as u64,
                    });
                }
                let p = table.as_slice();
                let gap = (first..=last)
                    .map(|n| p[n as usize] - p[n as usize - 1])
                    .max()
                    .unwrap_or(0);
                Ok(BUMP_DERIVATIVE_BOUND * gap as f64)
            }
            _ => {
                let (a, b) = self.spec.power_log().expect("power-log family");
                if b > 0.0 && b < 1.0 && lo <= 1.0 {
                    return Err(SequenceError::InvalidArgument(
                        "f' is unbounded at x = 1 for 0 < b < 1".into(),
                    ));
                }
                // f' is monotone or convex-shaped on [lo, hi] for b >= 0, so
                // its maximum sits at an endpoint.
                Ok(powerlog_derivative(a, b, lo).max(powerlog_derivative(a, b, hi)))
            }
        }
    }

    /// `Σ_{n >= n1} f(n)^{-s}` with a guaranteed enclosure.
    ///
    /// Affine families are exact to ~1e-15 relative; prime families are
    /// summed through the sieve and enclosed beyond it; power-log families
    /// sum 2^20 terms and enclose the rest.
    pub fn tail_sum(&self, n1: u64, s: f64) -> Result<SumEnclosure, SequenceError> {
        if !(s > 1.0) {
            return Err(SequenceError::NonConvergent { s });
        }
        Self::check_index(n1)?;
        match self.spec {
            FamilySpec::Ap { q, r } => {
                let g = AffinePower { q, r, s };
                let start = g.em_start().max(n1);
                let mut head = Accumulator::new(self.precision);
                for n in n1..start {
                    head.add(g.value(n as f64));
                }
                let (tail, rem) = g.em_tail(start as f64);
                let value = head.value() + tail;
                // One rounding per `powf` and per addition, plus the remainder.
                let rounding = (start - n1 + 16) as f64 * f64::EPSILON * value;
                Ok(SumEnclosure::exact(value, rem + rounding))
            }
            FamilySpec::Prime => {
                let available = self.max_index().unwrap_or(0);
                let mut head = Accumulator::new(self.precision);
                let p = self.primes.as_ref().map(|t| t.as_slice()).unwrap_or(&[]);
                for n in n1..=available {
                    head.add((p[n as usize - 1] as f64).powf(-s));
                }
                let cut = n1.max(available + 1);
                if cut < 6 {
                    return Err(SequenceError::IndexBeyondSieve {
                        index: 6,
                        available,
                    });
                }
                let (lo, hi) = prime_tail_beyond(cut, s);
                let h = head.value();
                let slack = 4.0 * f64::EPSILON * (h + hi);
                Ok(SumEnclosure::from_bounds(h + lo - slack, h + hi + slack))
            }
            _ => {
                let (a, b) = self.spec.power_log().expect("power-log family");
                if n1 < 2 {
                    return Err(SequenceError::InvalidArgument(
                        "power-log families start at n = 2".into(),
                    ));
                }
                let cut = n1 + POWERLOG_DIRECT_TERMS;
                let mut head = Accumulator::new(self.precision);
                for n in n1..cut {
                    let x = n as f64;
                    head.add((a * x * x.ln().powf(b)).powf(-s));
                }
                let (lo, hi) = powerlog_tail_beyond(a, b, cut, s);
                let h = head.value();
                let slack = 4.0 * f64::EPSILON * (h + hi);
                Ok(SumEnclosure::from_bounds(h + lo - slack, h + hi + slack))
            }
        }
    }

    /// [`tail_sum`](Self::tail_sum), failing when the enclosure is wider than
    /// `rel_tol` relative to its midpoint.
    pub fn tail_sum_within(
        &self,
        n1: u64,
        s: f64,
        rel_tol: f64,
    ) -> Result<SumEnclosure, SequenceError> {
        let e = self.tail_sum(n1, s)?;
        if e.relative_width() > rel_tol {
            return Err(SequenceError::EnclosureTooWide {
                relative_width: e.relative_width(),
                requested: rel_tol,
            });
        }
        Ok(e)
    }

    /// `Σ_{n=1}^{n1-1} f(n)^{-s}` for `0 < s < 1` (power-log families start
    /// at `n = 2`, where `f` first becomes positive).
    pub fn partial_sum(&self, n1: u64, s: f64) -> Result<f64, SequenceError> {
        if n1 < 2 {
            return Err(SequenceError::InvalidArgument(format!(
                "partial sums need n1 >= 2, got {n1}"
            )));
        }
        if !(s > 0.0) {
            return Err(SequenceError::InvalidArgument(format!(
                "exponent must be positive, got {s}"
            )));
        }
        let last = n1 - 1;
        match self.spec {
            FamilySpec::Ap { q, r } => {
                let g = AffinePower { q, r, s };
                if last <= DIRECT_PARTIAL_LIMIT {
                    let mut acc = Accumulator::new(self.precision);
                    for n in 1..=last {
                        acc.add(g.value(n as f64));
                    }
                    return Ok(acc.value());
                }
                let start = g.em_start();
                let mut acc = Accumulator::new(self.precision);
                for n in 1..start {
                    acc.add(g.value(n as f64));
                }
                let (mid, _) = g.em_range(start as f64, last as f64);
                Ok(acc.value() + mid)
            }
            FamilySpec::Prime => {
                let available = self.max_index().unwrap_or(0);
                if last > available {
                    return Err(SequenceError::IndexBeyondSieve {
                        index: last,
                        available,
                    });
                }
                let p = self.primes.as_ref().expect("prime table").as_slice();
                let mut acc = Accumulator::new(self.precision);
                for &q in &p[..last as usize] {
                    acc.add((q as f64).powf(-s));
                }
                Ok(acc.value())
            }
            _ => {
                let mut acc = Accumulator::new(self.precision);
                for n in 2..=last {
                    acc.add(self.eval_f(n)?.powf(-s));
                }
                Ok(acc.value())
            }
        }
    }

    /// Checks strict monotonicity of the cached values on `[lo, hi]`.
    pub fn is_strictly_increasing_on(&self, lo: u64, hi: u64) -> Result<bool, SequenceError> {
        let mut prev = self.eval_f(lo.max(2))?;
        for n in lo.max(2) + 1..=hi {
            let v = self.eval_f(n)?;
            if v <= prev {
                return Ok(false);
            }
            prev = v;
        }
        Ok(true)
    }
}

fn powerlog_derivative(a: f64, b: f64, x: f64) -> f64 {
    if b == 0.0 {
        return a;
    }
    let l = x.ln();
    a * l.powf(b - 1.0) * (l + b)
}

/// Enclosure of `Σ_{n >= cut} p_n^{-s}` from `n log n < p_n < n(log n + log log n)`.
fn prime_tail_beyond(cut: u64, s: f64) -> (f64, f64) {
    let rate = s - 1.0;
    // Upper: Σ (n log n)^{-s} <= ∫_{cut-1/2}^∞ (x log x)^{-s} dx (midpoint rule,
    // convex integrand); substitute x = e^u.
    let upper_integrand = |u: f64| ((1.0 - s) * u).exp() * u.powf(-s);
    let (_, upper) = convex_tail_integral(upper_integrand, (cut as f64 - 0.5).ln(), rate);
    // Lower: Σ (n(log n + log log n))^{-s} >= ∫_{cut}^∞ of the same (decreasing).
    let lower_integrand = |u: f64| ((1.0 - s) * u).exp() * (u + u.ln()).powf(-s);
    let (lower, _) = convex_tail_integral(lower_integrand, (cut as f64).ln(), rate);
    (lower, upper)
}

/// Enclosure of `Σ_{n >= cut} (a n (log n)^b)^{-s}` for a convex decreasing summand.
fn powerlog_tail_beyond(a: f64, b: f64, cut: u64, s: f64) -> (f64, f64) {
    let rate = s - 1.0;
    let scale = a.powf(-s);
    let integrand = |u: f64| scale * ((1.0 - s) * u).exp() * u.powf(-b * s);
    let x = cut as f64;
    let first = (a * x * x.ln().powf(b)).powf(-s);
    // Trapezoid: Σ_{n>=cut} g(n) >= ∫_cut^∞ g + g(cut)/2.
    let (lo, _) = convex_tail_integral(integrand, x.ln(), rate);
    // Midpoint: Σ_{n>=cut} g(n) <= ∫_{cut-1/2}^∞ g.
    let (_, hi) = convex_tail_integral(integrand, (x - 0.5).ln(), rate);
    (lo + 0.5 * first, hi)
}

impl SideLengths for SidelengthFamily {
    fn value(&self, n: u64) -> Result<f64, SequenceError> {
        self.eval_f(n)
    }

    fn smooth(&self, x: f64) -> Result<f64, SequenceError> {
        self.eval_smooth(x)
    }

    fn max_derivative(&self, lo: f64, hi: f64) -> Result<f64, SequenceError> {
        SidelengthFamily::max_derivative(self, lo, hi)
    }
}
