//! `S = sum_d mu(d) I(d)` with
//! `I(d) = sum u v mu(n1 n2) mu(n3)` over constrained triples having
//! `d | n1 n2` and `d | n3`.

use super::{weight_product, Partial, SumValue};
use crate::accum::{tree_reduce, CompensatedComplex};
use crate::arith::gcd;
use crate::collection::{Materialized, SideTerm};
use crate::sieve::mobius_range;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionTrace {
    pub d_values: Vec<u64>,
    pub i_of_d: Vec<SumValue>,
    /// `sum_d mu(d) I(d)` over all listed `d`.
    pub partial_reconstruction: SumValue,
    pub split_point_d: u64,
    /// Contribution of `d <= split_point_d`.
    pub small_d_sum: SumValue,
    /// Contribution of `d > split_point_d`.
    pub large_d_sum: SumValue,
}

/// A pair `(n1, n2)` with `mu(n1 n2) != 0`, keyed by `s = f(n1) + g(n2)`.
pub(super) struct Pair {
    pub s: i128,
    pub n1: u64,
    pub n2: u64,
    pub mu12: i8,
    pub wi: i64,
    pub wc: Complex64,
}

/// Pairs sorted by `(s, n1, n2)`.
pub(super) fn pair_index(side_a: &[SideTerm], side_b: &[SideTerm]) -> Vec<Pair> {
    let mut pairs = Vec::new();
    for a in side_a {
        for b in side_b {
            // mu(n1 n2)
            let mu12 = if a.mu == 0 || b.mu == 0 || gcd(a.n, b.n) != 1 {
                0
            } else {
                a.mu * b.mu
            };
            if mu12 == 0 {
                continue;
            }
            let (wi, wc) = weight_product(a, b);
            pairs.push(Pair {
                s: a.image as i128 + b.image as i128,
                n1: a.n,
                n2: b.n,
                mu12,
                wi,
                wc,
            });
        }
    }
    pairs.sort_by_key(|p| (p.s, p.n1, p.n2));
    pairs
}

fn i_single(mat: &Materialized, pairs: &[Pair], d: u64) -> Partial {
    let iv = mat.interval_n3;
    let mut exact = 0i128;
    let mut approx = CompensatedComplex::new();
    let mut visited = 0u64;
    if iv.is_empty() || d > iv.hi() {
        return Partial::default();
    }
    let first = iv.lo().div_ceil(d) * d;
    let mut n3 = first;
    while n3 <= iv.hi() {
        let t = &mat.n3[(n3 - iv.lo()) as usize];
        if t.mu != 0 {
            let target = mat.target_m as i128 - t.wp as i128;
            let lo = pairs.partition_point(|p| p.s < target);
            for p in pairs[lo..].iter().take_while(|p| p.s == target) {
                visited += 1;
                if !((p.n1 % d) as u128 * (p.n2 % d) as u128).is_multiple_of(d as u128) {
                    continue;
                }
                let sign = p.mu12 * t.mu;
                if mat.integral {
                    exact += (p.wi * sign as i64) as i128;
                } else {
                    approx.add(p.wc * sign as f64);
                }
            }
        }
        match n3.checked_add(d) {
            Some(next) => n3 = next,
            None => break,
        }
    }
    Partial {
        exact,
        approx: approx.value(),
        visited,
    }
}

pub(super) fn run(mat: &Materialized, split: u64) -> (Partial, DecompositionTrace) {
    let top = if mat.interval_n3.is_empty() {
        0
    } else {
        mat.interval_n3.hi()
    };
    let pairs = pair_index(&mat.a, &mat.b);
    let ds: Vec<u64> = (1..=top).collect();
    let i_parts: Vec<Partial> = ds.par_iter().map(|&d| i_single(mat, &pairs, d)).collect();
    let mu_d = if top == 0 {
        Vec::new()
    } else {
        mobius_range(1, top).expect("d range is valid")
    };
    let weighted: Vec<Partial> = i_parts
        .iter()
        .zip(&mu_d)
        .map(|(p, &m)| Partial {
            exact: p.exact * m as i128,
            approx: p.approx * m as f64,
            visited: p.visited,
        })
        .collect();
    let cut = (split.min(top)) as usize;
    let small = tree_reduce(weighted[..cut].to_vec(), Partial::default());
    let large = tree_reduce(weighted[cut..].to_vec(), Partial::default());
    let total = tree_reduce(weighted, Partial::default());
    let integral = mat.integral;
    let trace = DecompositionTrace {
        d_values: ds,
        i_of_d: i_parts.iter().map(|p| p.value(integral)).collect(),
        partial_reconstruction: total.value(integral),
        split_point_d: split,
        small_d_sum: small.value(integral),
        large_d_sum: large.value(integral),
    };
    (total, trace)
}

/// `I(d)` for a single `d`, including `d` beyond `max N3`.
pub(super) fn single(mat: &Materialized, d: u64) -> SumValue {
    let pairs = pair_index(&mat.a, &mat.b);
    i_single(mat, &pairs, d).value(mat.integral)
}
