//! Binary Goldbach quantities: `R_1(m) = sum_{p+q=m} log p log q` over
//! ordered prime pairs, the singular series `S_1(m)`, and the comparison
//! of `sum mu(m) R_1(m)` with `sum mu(m) m S_1(m)`.

mod exponent;
mod series;

pub use exponent::{
    exponent_b, exponent_c, exponent_value, parse_rational, write_exponent_csv, ExponentValue,
    EXPONENT_CSV_HEADER,
};
pub use series::{
    singular_series, singular_series_with_cutoff, write_series_csv, SingularSeriesValue,
    MAX_PRIME_CUTOFF, SERIES_CSV_HEADER,
};

use crate::accum::{tree_reduce, Compensated};
use crate::error::{arg, Error, Result};
use crate::sieve::{primes_up_to, sieve_block};
use rayon::prelude::*;
use rustfft::FftPlanner;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Largest `x` accepted by the direct double loop.
pub const DIRECT_LIMIT: u64 = 100_000;
/// Largest `x` accepted by the convolution path.
pub const FFT_LIMIT: u64 = 100_000_000;
/// `Auto` switches from the double loop to the convolution above this.
pub const AUTO_DIRECT_MAX: u64 = 20_000;
/// Default byte budget for the convolution buffer.
pub const DEFAULT_FFT_BUDGET: u64 = 1 << 31;

/// Every nonzero `R_1(m)` is at least `(log 2)^2 > 0.48`; convolution output
/// below this is a transform artefact at an `m` with no representation.
const FFT_ZERO_SNAP: f64 = 0.24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum R1Method {
    Auto,
    Direct,
    Fft,
}

fn prime_logs(x: u64) -> Vec<f64> {
    let mut w = vec![0.0; x as usize + 1];
    for p in primes_up_to(x) {
        w[p as usize] = (p as f64).ln();
    }
    w
}

/// `R_1(m)` for a single `m`.
pub fn r1(m: u64) -> Result<f64> {
    if m < 2 {
        return arg("r1 needs m >= 2");
    }
    let w = prime_logs(m);
    Ok(r1_from_logs(&w, m))
}

fn r1_from_logs(w: &[f64], m: u64) -> f64 {
    let mut acc = Compensated::new();
    for p in 2..=m / 2 {
        let (lp, lq) = (w[p as usize], w[(m - p) as usize]);
        if lp != 0.0 && lq != 0.0 {
            let t = lp * lq;
            acc.add(if 2 * p == m { t } else { 2.0 * t });
        }
    }
    acc.value()
}

/// `R_1(m)` for every `0 <= m <= x`, indexed by `m`.
pub fn r1_all(x: u64) -> Result<Vec<f64>> {
    r1_all_with(x, R1Method::Auto, DEFAULT_FFT_BUDGET)
}

pub fn r1_all_with(x: u64, method: R1Method, fft_budget: u64) -> Result<Vec<f64>> {
    let method = match method {
        R1Method::Auto if x <= AUTO_DIRECT_MAX => R1Method::Direct,
        R1Method::Auto => R1Method::Fft,
        m => m,
    };
    match method {
        R1Method::Direct => {
            if x > DIRECT_LIMIT {
                return Err(Error::Resource(format!(
                    "direct R1 is limited to x <= {DIRECT_LIMIT}, got {x}"
                )));
            }
            Ok(r1_direct(x))
        }
        _ => {
            if x > FFT_LIMIT {
                return Err(Error::Resource(format!(
                    "R1 convolution is limited to x <= {FFT_LIMIT}, got {x}"
                )));
            }
            let len = (2 * x + 1).next_power_of_two();
            let bytes = len * std::mem::size_of::<Complex64>() as u64;
            if bytes > fft_budget {
                return Err(Error::Resource(format!(
                    "R1 convolution for x = {x} needs {bytes} bytes, budget is {fft_budget}"
                )));
            }
            Ok(r1_fft(x, len as usize))
        }
    }
}

fn r1_direct(x: u64) -> Vec<f64> {
    let w = prime_logs(x);
    const CHUNK: u64 = 1024;
    let chunks: Vec<Vec<f64>> = (0..=x / CHUNK)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK - 1).min(x);
            (lo..=hi)
                .map(|m| if m < 4 { 0.0 } else { r1_from_logs(&w, m) })
                .collect()
        })
        .collect();
    chunks.concat()
}

fn r1_fft(x: u64, len: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for p in primes_up_to(x) {
        buf[p as usize].re = (p as f64).ln();
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = *z * *z;
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    buf.truncate(x as usize + 1);
    buf.into_iter()
        .map(|z| {
            let v = z.re * scale;
            if v.abs() < FFT_ZERO_SNAP {
                0.0
            } else {
                v
            }
        })
        .collect()
}

/// Weight put on `m` in place of `mu(m)` by [`vaughan_compare_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareWeight {
    Mobius,
    AbsMobius,
    One,
}

impl CompareWeight {
    pub fn name(self) -> &'static str {
        match self {
            CompareWeight::Mobius => "mobius",
            CompareWeight::AbsMobius => "abs_mobius",
            CompareWeight::One => "one",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VaughanComparison {
    pub x: u64,
    /// `sum_{m <= x} w(m) R_1(m)`.
    pub left: f64,
    /// `sum_{m <= x} w(m) m S_1(m)`.
    pub right: f64,
    pub left_normalized: f64,
    pub right_normalized: f64,
    /// `(left - right) / x^2`.
    pub difference_normalized: f64,
    pub prime_cutoff: u64,
    pub weight: CompareWeight,
}

pub const COMPARE_CSV_HEADER: &str =
    "x,weight,left,right,left_normalized,right_normalized,difference_normalized,cutoff";

impl VaughanComparison {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.x,
            self.weight.name(),
            self.left,
            self.right,
            self.left_normalized,
            self.right_normalized,
            self.difference_normalized,
            self.prime_cutoff
        )
    }
}

/// Default prime cutoff for the singular series inside [`vaughan_compare`].
pub const COMPARE_CUTOFF: u64 = 10_000_000;

pub fn vaughan_compare(x: u64) -> Result<VaughanComparison> {
    vaughan_compare_with(x, CompareWeight::Mobius, COMPARE_CUTOFF)
}

pub fn vaughan_compare_with(x: u64, weight: CompareWeight, cutoff: u64) -> Result<VaughanComparison> {
    if x < 2 {
        return arg("vaughan_compare needs x >= 2");
    }
    let r1 = r1_all(x)?;
    let block = sieve_block(1, x)?;
    let log_sum = series::odd_log_sum(cutoff)?;
    let kind = weight;
    let weight = |m: u64| match kind {
        CompareWeight::Mobius => block.mu(m) as f64,
        CompareWeight::AbsMobius => (block.mu(m) as f64).abs(),
        CompareWeight::One => 1.0,
    };
    const CHUNK: u64 = 1 << 14;
    let parts: Vec<(Compensated, Compensated)> = (0..=x / CHUNK)
        .into_par_iter()
        .map(|c| {
            let (mut l, mut r) = (Compensated::new(), Compensated::new());
            let mut odd = Vec::new();
            for m in (c * CHUNK).max(2)..=((c + 1) * CHUNK - 1).min(x) {
                let w = weight(m);
                if w == 0.0 {
                    continue;
                }
                l.add(w * r1[m as usize]);
                if m % 2 == 0 {
                    odd.clear();
                    let mut k = m;
                    while k > 1 {
                        let p = block.spf(k);
                        if p != 2 && odd.last() != Some(&p) {
                            odd.push(p);
                        }
                        k /= p;
                    }
                    let s = series::value_from_primes(&odd, cutoff, log_sum);
                    r.add(w * m as f64 * s);
                }
            }
            (l, r)
        })
        .collect();
    let left = tree_reduce(parts.iter().map(|p| p.0.value()).collect(), 0.0);
    let right = tree_reduce(parts.iter().map(|p| p.1.value()).collect(), 0.0);
    let x2 = (x as f64) * (x as f64);
    Ok(VaughanComparison {
        x,
        left,
        right,
        left_normalized: left / x2,
        right_normalized: right / x2,
        difference_normalized: (left - right) / x2,
        prime_cutoff: cutoff,
        weight: kind,
    })
}

pub const R1_CSV_HEADER: &str = "m,R1";

/// Writes `m,R1` rows for `m` in `[lo, values.len())`.
pub fn write_r1_csv<W: Write>(mut w: W, values: &[f64], lo: u64) -> Result<()> {
    writeln!(w, "{R1_CSV_HEADER}")?;
    for (m, v) in values.iter().enumerate().skip(lo as usize) {
        writeln!(w, "{m},{v:.16e}")?;
    }
    Ok(())
}
