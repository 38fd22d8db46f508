//! Segmented sieve of Eratosthenes over odd numbers.

use rayon::prelude::*;

use super::SequenceError;

/// Numbers covered by one segment (odd numbers only are stored, so the
/// segment buffer holds `SEGMENT_SPAN / 2` flags).
const SEGMENT_SPAN: u64 = 1 << 20;

/// Default sieve cap, overridable through `PACKER_SIEVE_LIMIT`.
pub const DEFAULT_SIEVE_CAP: u64 = 4_000_000_000;

/// Environment variable that caps the sieve limit.
pub const SIEVE_LIMIT_ENV: &str = "PACKER_SIEVE_LIMIT";

/// The configured cap: `PACKER_SIEVE_LIMIT` if set and parseable, else
/// [`DEFAULT_SIEVE_CAP`]. Never above `u32::MAX` since primes are stored as `u32`.
pub fn sieve_cap() -> u64 {
    std::env::var(SIEVE_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().replace('_', "").parse::<f64>().ok())
        .map(|v| v as u64)
        .unwrap_or(DEFAULT_SIEVE_CAP)
        .min(u32::MAX as u64)
}

/// All primes up to a limit, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    primes: Vec<u32>,
    limit: u64,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.primes
    }

    /// The `n`-th prime, 1-based (`nth(1) == 2`).
    pub fn nth(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return None;
        }
        self.primes.get((n - 1) as usize).map(|&p| p as u64)
    }

    /// Number of primes `<= x` for `x` within the table's limit.
    pub fn count_up_to(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| (p as u64) <= x)
    }

    pub fn is_prime(&self, x: u64) -> bool {
        x <= self.limit && x <= u32::MAX as u64 && self.primes.binary_search(&(x as u32)).is_ok()
    }
}

/// Primes up to `limit` under the configured cap.
pub fn enumerate_primes(limit: u64) -> Result<PrimeTable, SequenceError> {
    enumerate_primes_capped(limit, sieve_cap())
}

/// Primes up to `limit`, refusing limits above `cap`.
pub fn enumerate_primes_capped(limit: u64, cap: u64) -> Result<PrimeTable, SequenceError> {
    if limit > cap || limit > u32::MAX as u64 {
        return Err(SequenceError::LimitTooLarge {
            limit,
            cap: cap.min(u32::MAX as u64),
        });
    }
    if limit < 2 {
        return Ok(PrimeTable {
            primes: Vec::new(),
            limit,
        });
    }
    let base = small_primes(isqrt(limit));
    let segments = limit.div_ceil(SEGMENT_SPAN);
    let chunks: Vec<Vec<u32>> = (0..segments)
        .into_par_iter()
        .map(|seg| {
            let lo = seg * SEGMENT_SPAN;
            let hi = ((seg + 1) * SEGMENT_SPAN).min(limit + 1);
            sieve_segment(lo, hi, &base)
        })
        .collect();
    let mut primes = Vec::with_capacity(chunks.iter().map(Vec::len).sum());
    for c in chunks {
        primes.extend_from_slice(&c);
    }
    Ok(PrimeTable { primes, limit })
}

/// Twin primes up to `limit`: primes `p` with `p - 2` or `p + 2` prime.
pub fn enumerate_twin_primes(limit: u64) -> Result<Vec<u32>, SequenceError> {
    enumerate_twin_primes_capped(limit, sieve_cap())
}

pub fn enumerate_twin_primes_capped(limit: u64, cap: u64) -> Result<Vec<u32>, SequenceError> {
    if limit > cap {
        return Err(SequenceError::LimitTooLarge { limit, cap });
    }
    let table = enumerate_primes_capped(limit.saturating_add(2), cap.saturating_add(2))?;
    let p = table.as_slice();
    let mut twins = Vec::new();
    for (k, &q) in p.iter().enumerate() {
        if q as u64 > limit {
            break;
        }
        let below = k > 0 && p[k - 1] + 2 == q;
        let above = p.get(k + 1).is_some_and(|&r| r == q + 2);
        if below || above {
            twins.push(q);
        }
    }
    Ok(twins)
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Plain sieve for the base primes `<= n`.
fn small_primes(n: u64) -> Vec<u32> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `[lo, hi)` using the odd-only segment buffer.
fn sieve_segment(lo: u64, hi: u64, base: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    if lo <= 2 && 2 < hi {
        out.push(2);
    }
    // First odd number >= max(lo, 3).
    let start = {
        let s = lo.max(3);
        if s.is_multiple_of(2) {
            s + 1
        } else {
            s
        }
    };
    if start >= hi {
        return out;
    }
    let slots = ((hi - start) as usize).div_ceil(2);
    let mut composite = vec![false; slots];
    for &p in base.iter().skip(1) {
        let p = p as u64;
        let sq = p * p;
        if sq >= hi {
            break;
        }
        // Smallest odd multiple of p that is >= max(start, p^2).
        let mut m = sq.max(start.div_ceil(p) * p);
        if m.is_multiple_of(2) {
            m += p;
        }
        let mut idx = ((m - start) / 2) as usize;
        let step = p as usize;
        while idx < slots {
            composite[idx] = true;
            idx += step;
        }
    }
    out.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| (start + 2 * i as u64) as u32),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn small_limits() {
        assert_eq!(
            enumerate_primes(13).unwrap().as_slice(),
            &[2, 3, 5, 7, 11, 13]
        );
        assert!(enumerate_primes(1).unwrap().is_empty());
        assert_eq!(enumerate_primes(2).unwrap().as_slice(), &[2]);
        assert_eq!(enumerate_primes(3).unwrap().as_slice(), &[2, 3]);
    }

    #[test]
    fn matches_trial_division_across_segment_boundaries() {
        let limit = 3 * SEGMENT_SPAN + 12_345;
        let table = enumerate_primes(limit).unwrap();
        let mut expected = Vec::new();
        // Only check windows around the boundaries plus the start; trial
        // division over the whole range would be slow.
        for center in [0, SEGMENT_SPAN, 2 * SEGMENT_SPAN, 3 * SEGMENT_SPAN] {
            let lo = center.saturating_sub(500);
            let hi = (center + 500).min(limit);
            expected.clear();
            expected.extend((lo..=hi).filter(|&n| trial_division(n)).map(|n| n as u32));
            let got: Vec<u32> = table
                .as_slice()
                .iter()
                .copied()
                .filter(|&p| (p as u64) >= lo && (p as u64) <= hi)
                .collect();
            assert_eq!(got, expected, "window around {center}");
        }
    }

    #[test]
    fn prime_counts() {
        assert_eq!(enumerate_primes(1_000_000).unwrap().len(), 78_498);
        assert_eq!(enumerate_primes(10_000_000).unwrap().len(), 664_579);
    }

    #[test]
    fn nth_is_one_based() {
        let t = enumerate_primes(100).unwrap();
        assert_eq!(t.nth(1), Some(2));
        assert_eq!(t.nth(5), Some(11));
        assert_eq!(t.nth(0), None);
        assert_eq!(t.nth(26), None);
        assert_eq!(t.count_up_to(10), 4);
        assert!(t.is_prime(97));
        assert!(!t.is_prime(91));
    }

    #[test]
    fn twin_primes() {
        assert_eq!(enumerate_twin_primes(13).unwrap(), vec![3, 5, 7, 11, 13]);
        assert_eq!(enumerate_twin_primes(4).unwrap(), vec![3]);
        let brute: Vec<u32> = (2..=30u64)
            .filter(|&p| {
                trial_division(p) && (trial_division(p + 2) || (p > 2 && trial_division(p - 2)))
            })
            .map(|p| p as u32)
            .collect();
        assert_eq!(brute, vec![3, 5, 7, 11, 13, 17, 19, 29]);
        assert_eq!(enumerate_twin_primes(30).unwrap(), brute);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            enumerate_primes_capped(1_000, 999),
            Err(SequenceError::LimitTooLarge { limit: 1_000, .. })
        ));
    }

    #[test]
    fn deterministic_output() {
        let a = enumerate_primes(5 * SEGMENT_SPAN).unwrap();
        let b = enumerate_primes(5 * SEGMENT_SPAN).unwrap();
        assert_eq!(a, b);
    }
}
