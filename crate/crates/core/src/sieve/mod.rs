//! Segmented sieves over arbitrary intervals.
//!
//! A [`SieveBlock`] covers a closed interval `[lo, hi]` and holds the Möbius
//! function, the divisor count, the smallest prime factor and a primality flag
//! for every entry. Blocks only need the primes up to `sqrt(hi)`, so any block
//! can be produced independently of its neighbours and blocks can be farmed out
//! to workers freely.
//!
//! Conventions at `n = 1`: `mu = 1`, `tau = 1`, `spf = 0`, not prime.

mod bits;
pub mod cache;
pub mod moments;

pub use bits::BitSet;
pub use moments::{divisor_moment, divisor_moment_with, DivisorMomentReport, MomentKind, MomentOptions};

use crate::arith::isqrt;
use crate::error::{arg, Error, Result};
use rayon::prelude::*;

pub const DEFAULT_BLOCK_CAPACITY: u64 = 1 << 22;
/// Largest value `nth_prime` and friends will sieve to unless told otherwise.
pub const DEFAULT_PRIME_BUDGET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveBlock {
    lo: u64,
    hi: u64,
    mu: Vec<i8>,
    tau: Vec<u32>,
    spf: Vec<u64>,
    is_prime: BitSet,
}

impl SieveBlock {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu_slice(&self) -> &[i8] {
        &self.mu
    }

    pub fn tau_slice(&self) -> &[u32] {
        &self.tau
    }

    pub fn spf_slice(&self) -> &[u64] {
        &self.spf
    }

    pub fn prime_bits(&self) -> &BitSet {
        &self.is_prime
    }

    #[inline]
    fn idx(&self, n: u64) -> usize {
        assert!(
            n >= self.lo && n <= self.hi,
            "{n} outside block [{}, {}]",
            self.lo,
            self.hi
        );
        (n - self.lo) as usize
    }

    #[inline]
    pub fn mu(&self, n: u64) -> i8 {
        self.mu[self.idx(n)]
    }

    #[inline]
    pub fn tau(&self, n: u64) -> u32 {
        self.tau[self.idx(n)]
    }

    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[self.idx(n)]
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        self.is_prime.get(self.idx(n))
    }

    pub(crate) fn from_parts(
        lo: u64,
        hi: u64,
        mu: Vec<i8>,
        tau: Vec<u32>,
        spf: Vec<u64>,
        is_prime: BitSet,
    ) -> Self {
        Self {
            lo,
            hi,
            mu,
            tau,
            spf,
            is_prime,
        }
    }
}

/// Sieves `[lo, hi]` with the default block capacity.
pub fn sieve_block(lo: u64, hi: u64) -> Result<SieveBlock> {
    sieve_block_with(lo, hi, DEFAULT_BLOCK_CAPACITY)
}

pub fn sieve_block_with(lo: u64, hi: u64, capacity: u64) -> Result<SieveBlock> {
    if lo < 1 {
        return arg("sieve interval must start at 1 or later");
    }
    if hi < lo {
        return arg(format!("sieve interval [{lo}, {hi}] has hi < lo"));
    }
    if hi > i64::MAX as u64 {
        return arg("sieve bound exceeds 2^63 - 1");
    }
    let len = hi - lo + 1;
    if len > capacity {
        return Err(Error::BlockCapacity { len, capacity });
    }
    let len = len as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut mu = vec![1i8; len];
    let mut tau = vec![1u32; len];
    let mut spf = vec![0u64; len];

    for_each_prime_in(2, isqrt(hi), |p| {
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m <= hi {
            let i = (m - lo) as usize;
            let mut q = rem[i] / p;
            let mut e = 1u32;
            while q.is_multiple_of(p) {
                q /= p;
                e += 1;
            }
            rem[i] = q;
            tau[i] *= e + 1;
            mu[i] = if e > 1 { 0 } else { -mu[i] };
            if spf[i] == 0 {
                spf[i] = p;
            }
            m = match m.checked_add(p) {
                Some(next) => next,
                None => break,
            };
        }
    });

    let mut is_prime = BitSet::new(len);
    for i in 0..len {
        let n = lo + i as u64;
        if rem[i] > 1 {
            // one prime factor above sqrt(hi) remains
            tau[i] *= 2;
            mu[i] = -mu[i];
            if spf[i] == 0 {
                spf[i] = n;
            }
        }
        if n >= 2 && spf[i] == n {
            is_prime.set(i);
        }
    }
    Ok(SieveBlock {
        lo,
        hi,
        mu,
        tau,
        spf,
        is_prime,
    })
}

/// Splits `[lo, hi]` into capacity-sized blocks, sieves them in parallel and
/// returns `f(block)` for each block in ascending order.
pub fn map_blocks<T, F>(lo: u64, hi: u64, capacity: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&SieveBlock) -> T + Sync,
{
    if hi < lo {
        return Ok(Vec::new());
    }
    if capacity == 0 {
        return arg("block capacity must be positive");
    }
    let count = (hi - lo) / capacity + 1;
    (0..count)
        .into_par_iter()
        .map(|k| {
            let b_lo = lo + k * capacity;
            let b_hi = b_lo.saturating_add(capacity - 1).min(hi);
            sieve_block_with(b_lo, b_hi, capacity).map(|b| f(&b))
        })
        .collect()
}

/// Möbius values for `[lo, hi]` (empty when `hi < lo`).
pub fn mobius_range(lo: u64, hi: u64) -> Result<Vec<i8>> {
    let parts = map_blocks(lo, hi, DEFAULT_BLOCK_CAPACITY, |b| b.mu.clone())?;
    Ok(parts.concat())
}

/// Sum of `mu(n)` for `n <= x`.
pub fn mertens(x: u64) -> Result<i64> {
    if x < 1 {
        return arg("mertens requires x >= 1");
    }
    let parts = map_blocks(1, x, DEFAULT_BLOCK_CAPACITY, |b| {
        b.mu.iter().map(|&m| m as i64).sum::<i64>()
    })?;
    Ok(parts.into_iter().sum())
}

/// Plain sieve of Eratosthenes returning all primes `<= limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime_in(2, limit, |p| out.push(p));
    out
}

/// Calls `f` on every prime in `[lo, hi]` in increasing order, using
/// segments of bounded size.
pub fn for_each_prime_in(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    let lo = lo.max(2);
    if hi < lo {
        return;
    }
    let root = isqrt(hi);
    let base = small_primes(root);
    const SEG: u64 = 1 << 18;
    let mut seg_lo = lo;
    let mut composite = vec![false; SEG as usize];
    loop {
        let seg_hi = seg_lo.saturating_add(SEG - 1).min(hi);
        let width = (seg_hi - seg_lo + 1) as usize;
        composite[..width].iter_mut().for_each(|c| *c = false);
        for &p in &base {
            if p * p > seg_hi {
                break;
            }
            let mut m = (seg_lo.div_ceil(p) * p).max(p * p);
            while m <= seg_hi {
                composite[(m - seg_lo) as usize] = true;
                m += p;
            }
        }
        for (i, &c) in composite[..width].iter().enumerate() {
            if !c {
                f(seg_lo + i as u64);
            }
        }
        if seg_hi == hi {
            break;
        }
        seg_lo = seg_hi + 1;
    }
}

fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Number of primes `<= x`.
pub fn prime_pi(x: u64) -> u64 {
    let mut count = 0u64;
    for_each_prime_in(2, x, |_| count += 1);
    count
}

/// Upper bound for the k-th prime (Rosser).
fn nth_prime_upper_bound(k: u64) -> u64 {
    if k < 6 {
        return 13;
    }
    let kf = k as f64;
    (kf * (kf.ln() + kf.ln().ln())).ceil() as u64 + 1
}

/// The k-th prime, `p_1 = 2`.
pub fn nth_prime(k: u64) -> Result<u64> {
    nth_prime_with_budget(k, DEFAULT_PRIME_BUDGET)
}

pub fn nth_prime_with_budget(k: u64, budget: u64) -> Result<u64> {
    if k < 1 {
        return arg("nth_prime requires k >= 1");
    }
    Ok(*nth_primes(k, k, budget)?.last().unwrap())
}

/// Primes `p_k` for `k` in `[k_lo, k_hi]`.
pub fn nth_primes(k_lo: u64, k_hi: u64, budget: u64) -> Result<Vec<u64>> {
    if k_lo < 1 || k_hi < k_lo {
        return arg(format!("bad prime index range [{k_lo}, {k_hi}]"));
    }
    let bound = nth_prime_upper_bound(k_hi);
    if bound > budget {
        return Err(Error::Resource(format!(
            "p_{k_hi} needs a sieve up to {bound}, budget is {budget}"
        )));
    }
    let mut out = Vec::with_capacity((k_hi - k_lo + 1) as usize);
    let mut k = 0u64;
    for_each_prime_in(2, bound, |p| {
        k += 1;
        if k >= k_lo && k <= k_hi {
            out.push(p);
        }
    });
    debug_assert_eq!(out.len() as u64, k_hi - k_lo + 1);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{is_prime_trial, mobius_trial};

    fn tau_trial(n: u64) -> u32 {
        (1..=n).filter(|d| n.is_multiple_of(*d)).count() as u32
    }

    #[test]
    fn first_ten_mobius() {
        let b = sieve_block(1, 10).unwrap();
        assert_eq!(b.mu_slice(), &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn conventions_at_one() {
        let b = sieve_block(1, 1).unwrap();
        assert_eq!((b.mu(1), b.tau(1), b.spf(1), b.is_prime(1)), (1, 1, 0, false));
    }

    #[test]
    fn square_of_prime() {
        let b = sieve_block(49, 49).unwrap();
        assert_eq!((b.mu(49), b.tau(49), b.spf(49)), (0, 3, 7));
    }

    #[test]
    fn offset_block_matches_trial_division() {
        let lo = 1_000_000_000;
        let b = sieve_block(lo, lo + 2000).unwrap();
        for n in lo..=lo + 2000 {
            assert_eq!(b.mu(n), mobius_trial(n), "mu({n})");
            assert_eq!(b.is_prime(n), is_prime_trial(n), "prime({n})");
        }
    }

    #[test]
    fn tau_small() {
        let b = sieve_block(1, 500).unwrap();
        for n in 1..=500 {
            assert_eq!(b.tau(n), tau_trial(n));
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(sieve_block(5, 4), Err(Error::Argument(_))));
        assert!(matches!(sieve_block(0, 4), Err(Error::Argument(_))));
        assert!(matches!(
            sieve_block_with(1, 100, 10),
            Err(Error::BlockCapacity { len: 100, capacity: 10 })
        ));
    }

    #[test]
    fn near_top_of_range() {
        let hi = i64::MAX as u64;
        let b = sieve_block(hi - 20, hi).unwrap();
        // 2^63 - 1 = 7^2 * 73 * 127 * 337 * 92737 * 649657
        assert_eq!(b.mu(hi), 0);
        assert_eq!(b.spf(hi), 7);
    }

    #[test]
    fn mertens_values() {
        assert_eq!(mertens(1).unwrap(), 1);
        assert_eq!(mertens(10).unwrap(), -1);
        let oracle: i64 = (1..=10_000).map(|n| mobius_trial(n) as i64).sum();
        assert_eq!(mertens(10_000).unwrap(), oracle);
        assert_eq!(oracle, -23);
    }

    #[test]
    fn nth_prime_values() {
        assert_eq!(nth_prime(1).unwrap(), 2);
        assert_eq!(nth_prime(5).unwrap(), 11);
        assert_eq!(nth_prime(25).unwrap(), 97);
        assert!(matches!(nth_prime_with_budget(10_000, 1000), Err(Error::Resource(_))));
    }

    #[test]
    fn nth_prime_brackets_pi() {
        for x in [10u64, 97, 100, 1000, 7919] {
            let k = prime_pi(x);
            assert!(nth_prime(k).unwrap() <= x);
            assert!(nth_prime(k + 1).unwrap() > x);
        }
    }

    #[test]
    fn prime_stream_segments() {
        let mut got = Vec::new();
        for_each_prime_in(262_100, 262_200, |p| got.push(p));
        let want: Vec<u64> = (262_100..=262_200).filter(|&n| is_prime_trial(n)).collect();
        assert_eq!(got, want);
    }
}
