use crate::accum::Compensated;
use crate::arith::prime_factors_trial;
use crate::error::{arg, Error, Result};
use crate::sieve::for_each_prime_in;
use serde::Serialize;
use std::collections::HashMap;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

/// Largest prime cutoff the truncated product will sieve to.
pub const MAX_PRIME_CUTOFF: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularSeriesValue {
    pub m: u64,
    pub value: f64,
    pub prime_cutoff: u64,
    /// Bound on `|S_1(m) - value|` from the primes above the cutoff.
    pub tail_bound: f64,
}

pub const SERIES_CSV_HEADER: &str = "m,singular_series,cutoff,tail";

impl SingularSeriesValue {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{},{:.3e}",
            self.m, self.value, self.prime_cutoff, self.tail_bound
        )
    }
}

pub fn write_series_csv<W: Write>(mut w: W, rows: &[SingularSeriesValue]) -> Result<()> {
    writeln!(w, "{SERIES_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

fn log_factor(p: u64) -> f64 {
    let t = 1.0 / ((p - 1) as f64 * (p - 1) as f64);
    (-t).ln_1p()
}

/// `sum_{3 <= p <= cutoff} log(1 - (p-1)^-2)`, cached per cutoff.
pub(super) fn odd_log_sum(cutoff: u64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    if cutoff > MAX_PRIME_CUTOFF {
        return Err(Error::Resource(format!(
            "prime cutoff {cutoff} exceeds {MAX_PRIME_CUTOFF}"
        )));
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&cutoff) {
        return Ok(*v);
    }
    let mut acc = Compensated::new();
    for_each_prime_in(3, cutoff, |p| acc.add(log_factor(p)));
    let v = acc.value();
    cache.lock().unwrap().insert(cutoff, v);
    Ok(v)
}

/// Relative truncation error: `sum_{p > P} (p-1)^-2 < 1/(P-1)`, and
/// `-log(1 - t) <= t / (1 - P^-2)` for `t <= P^-2`.
fn relative_tail(cutoff: u64) -> f64 {
    let p = cutoff as f64;
    (1.0 / (p - 1.0)) / (1.0 - 1.0 / (p * p))
}

/// Value for even `m` whose odd prime divisors are `odd` (ascending).
pub(super) fn value_from_primes(odd: &[u64], cutoff: u64, log_sum: f64) -> f64 {
    let mut acc = Compensated::new();
    acc.add(std::f64::consts::LN_2);
    acc.add(log_sum);
    for &p in odd {
        if p <= cutoff {
            acc.add(-log_factor(p));
        }
        acc.add((1.0 / (p - 1) as f64).ln_1p());
    }
    acc.value().exp()
}

/// `S_1(m)` truncated at primes `<= cutoff` in the product over `p` not
/// dividing `m`; the product over `p | m` is always complete.
pub fn singular_series_with_cutoff(m: u64, cutoff: u64) -> Result<SingularSeriesValue> {
    if m < 1 {
        return arg("singular series needs m >= 1");
    }
    if cutoff < 2 {
        return arg("prime cutoff must be at least 2");
    }
    if m % 2 == 1 {
        return Ok(SingularSeriesValue {
            m,
            value: 0.0,
            prime_cutoff: cutoff,
            tail_bound: 0.0,
        });
    }
    let odd: Vec<u64> = prime_factors_trial(m).into_iter().filter(|&p| p != 2).collect();
    let value = value_from_primes(&odd, cutoff, odd_log_sum(cutoff)?);
    Ok(SingularSeriesValue {
        m,
        value,
        prime_cutoff: cutoff,
        tail_bound: value * relative_tail(cutoff),
    })
}

/// `S_1(m)` with the cutoff chosen so that the tail bound is below
/// `tolerance`.
pub fn singular_series(m: u64, tolerance: f64) -> Result<SingularSeriesValue> {
    if !(tolerance > 0.0) {
        return arg("tolerance must be positive");
    }
    if m % 2 == 1 {
        return singular_series_with_cutoff(m, 2);
    }
    // the truncated value never exceeds 2 prod_{p | m, p odd} p / (p-1)
    let bound = prime_factors_trial(m)
        .into_iter()
        .filter(|&p| p != 2)
        .fold(2.0, |acc, p| acc * p as f64 / (p - 1) as f64);
    let need = (bound / tolerance * 1.001 + 2.0).ceil();
    if need > MAX_PRIME_CUTOFF as f64 {
        return Err(Error::Resource(format!(
            "tolerance {tolerance} needs primes up to {need:.3e}"
        )));
    }
    let r = singular_series_with_cutoff(m, (need as u64).max(1000))?;
    debug_assert!(r.tail_bound < tolerance);
    Ok(r)
}
