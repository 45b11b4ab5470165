//! Empirical moments of the divisor function.
//!
//! Each report carries the raw sum together with its ratio to the classical
//! order of magnitude, so that boundedness of the ratio across scales can be
//! checked numerically.

use super::{map_blocks, DEFAULT_BLOCK_CAPACITY};
use crate::accum::{tree_reduce, Pairwise};
use crate::arith::gcd;
use crate::error::{arg, Result};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MomentKind {
    /// sum_{n <= x} tau(n)^k
    Power,
    /// sum_{n <= x} tau(n)^k / n^(1/2)
    Half,
    /// sum_{x < n <= cut} tau(n)^k / n^(3/2)
    Tail,
    /// sum_{n <= x} sqrt(gcd(m, n)) / n
    Gcd,
}

#[derive(Debug, Clone, Copy)]
pub struct MomentOptions {
    /// TAIL sums stop at `tail_multiple * x`.
    pub tail_multiple: u64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            tail_multiple: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DivisorMomentReport {
    pub kind: MomentKind,
    pub x: u64,
    pub k: u32,
    pub m: u64,
    pub sum_value: f64,
    /// Exact decimal value for POWER sums.
    pub exact: Option<String>,
    /// Upper end of a truncated TAIL sum.
    pub truncated_at: Option<u64>,
    pub normalized_ratio: f64,
}

pub fn divisor_moment(kind: MomentKind, x: u64, k: u32, m: u64) -> Result<DivisorMomentReport> {
    divisor_moment_with(kind, x, k, m, MomentOptions::default())
}

pub fn divisor_moment_with(
    kind: MomentKind,
    x: u64,
    k: u32,
    m: u64,
    opts: MomentOptions,
) -> Result<DivisorMomentReport> {
    if x < 2 {
        return arg("divisor moments need x >= 2");
    }
    if kind != MomentKind::Gcd && !(1..=20).contains(&k) {
        return arg("divisor moments need 1 <= k <= 20");
    }
    if kind == MomentKind::Gcd && m < 1 {
        return arg("GCD moment needs m >= 1");
    }
    let logx = (x as f64).ln();
    let log_exp = (1i32 << k) - 1;
    let xf = x as f64;
    let cap = DEFAULT_BLOCK_CAPACITY;
    let mut report = DivisorMomentReport {
        kind,
        x,
        k,
        m,
        sum_value: 0.0,
        exact: None,
        truncated_at: None,
        normalized_ratio: 0.0,
    };
    match kind {
        MomentKind::Power => {
            let parts = map_blocks(1, x, cap, |b| power_block_sum(b.tau_slice(), k))?;
            let total = parts.into_iter().fold(BigInt::zero(), |acc, p| acc + p);
            report.sum_value = total.to_f64().unwrap_or(f64::INFINITY);
            report.exact = Some(total.to_string());
            report.normalized_ratio = report.sum_value / (xf * logx.powi(log_exp));
        }
        MomentKind::Half => {
            let parts = map_blocks(1, x, cap, |b| {
                let mut acc = Pairwise::new();
                for (i, &t) in b.tau_slice().iter().enumerate() {
                    let n = (b.lo() + i as u64) as f64;
                    acc.add((t as f64).powi(k as i32) / n.sqrt());
                }
                acc.value()
            })?;
            report.sum_value = tree_reduce(parts, 0.0);
            report.normalized_ratio = report.sum_value / (xf.sqrt() * logx.powi(log_exp));
        }
        MomentKind::Tail => {
            let cut = x
                .checked_mul(opts.tail_multiple.max(2))
                .ok_or_else(|| crate::Error::Argument("tail cut overflows".into()))?;
            let parts = map_blocks(x + 1, cut, cap, |b| {
                let mut acc = Pairwise::new();
                for (i, &t) in b.tau_slice().iter().enumerate() {
                    let n = (b.lo() + i as u64) as f64;
                    acc.add((t as f64).powi(k as i32) / (n * n.sqrt()));
                }
                acc.value()
            })?;
            report.sum_value = tree_reduce(parts, 0.0);
            report.truncated_at = Some(cut);
            report.normalized_ratio = report.sum_value / (logx.powi(log_exp) / xf.sqrt());
        }
        MomentKind::Gcd => {
            const CHUNK: u64 = 1 << 16;
            let chunks: Vec<f64> = {
                use rayon::prelude::*;
                (0..x.div_ceil(CHUNK))
                    .into_par_iter()
                    .map(|c| {
                        let mut acc = Pairwise::new();
                        let lo = c * CHUNK + 1;
                        for n in lo..=(lo + CHUNK - 1).min(x) {
                            acc.add((gcd(m, n) as f64).sqrt() / n as f64);
                        }
                        acc.value()
                    })
                    .collect()
            };
            report.sum_value = tree_reduce(chunks, 0.0);
            let tau_m = (1..=crate::arith::isqrt(m))
                .filter(|d| m.is_multiple_of(*d))
                .map(|d| if d * d == m { 1 } else { 2 })
                .sum::<u64>();
            report.normalized_ratio = report.sum_value / (tau_m as f64 * logx);
        }
    }
    Ok(report)
}

fn power_block_sum(tau: &[u32], k: u32) -> BigInt {
    let mut acc: i128 = 0;
    for (i, &t) in tau.iter().enumerate() {
        match (t as i128).checked_pow(k).and_then(|v| acc.checked_add(v)) {
            Some(next) => acc = next,
            None => {
                // escalate the rest of the block to big integers
                let mut big = BigInt::from(acc);
                for &t in &tau[i..] {
                    big += BigInt::from(t).pow(k);
                }
                return big;
            }
        }
    }
    BigInt::from(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_small() {
        let r = divisor_moment(MomentKind::Power, 4, 1, 0).unwrap();
        assert_eq!(r.sum_value, 8.0);
        assert_eq!(r.exact.as_deref(), Some("8"));
    }

    #[test]
    fn gcd_with_one() {
        let r = divisor_moment(MomentKind::Gcd, 2, 0, 1).unwrap();
        assert_eq!(r.sum_value, 1.5);
    }

    #[test]
    fn power_escalates_instead_of_wrapping() {
        // tau(720720) = 240, and 240^20 overflows i128 many times over
        let tau = [240u32, 240];
        let got = power_block_sum(&tau, 20);
        assert_eq!(got, BigInt::from(240u32).pow(20u32) * 2);
    }

    #[test]
    fn tail_reports_cut() {
        let opts = MomentOptions { tail_multiple: 100 };
        let r = divisor_moment_with(MomentKind::Tail, 10, 1, 0, opts).unwrap();
        assert_eq!(r.truncated_at, Some(1000));
        assert!(r.sum_value > 0.0 && r.normalized_ratio > 0.0);
    }

    #[test]
    fn argument_errors() {
        assert!(divisor_moment(MomentKind::Power, 1, 1, 0).is_err());
        assert!(divisor_moment(MomentKind::Half, 10, 0, 0).is_err());
        assert!(divisor_moment(MomentKind::Gcd, 10, 0, 0).is_err());
    }
}
