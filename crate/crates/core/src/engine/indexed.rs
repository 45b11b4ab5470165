//! Pair scan against a sorted `wp`-bucket index.
//!
//! Terms with `mu(n_i) = 0` are dropped up front since `mu(n1 n2 n3)`
//! vanishes for them. The index holds `(wp(n3), n3, mu(n3))` sorted by value
//! and restricted to values some pair can reach; lookups are by binary
//! search, or through a dense offset table when the value range is narrow.
//! If the index would exceed the memory budget, the value range is split
//! into windows processed one after another.

use super::{weight_product, EngineConfig, Partial};
use crate::accum::{tree_reduce, CompensatedComplex};
use crate::arith::gcd;
use crate::collection::{Materialized, SideTerm};
use crate::error::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub(super) struct Entry {
    pub wp: i64,
    pub n: u64,
    pub mu: i8,
}

const ENTRY_BYTES: u64 = std::mem::size_of::<Entry>() as u64;

pub(super) struct Index {
    entries: Vec<Entry>,
    dense: Option<(i64, Vec<u32>)>,
}

impl Index {
    /// Entries of `mat.n3` with nonzero `mu` and `wp` in `[lo, hi]`.
    pub fn build(mat: &Materialized, lo: i64, hi: i64) -> Self {
        let mut entries: Vec<Entry> = mat
            .n3
            .iter()
            .filter(|t| t.mu != 0 && t.wp >= lo && t.wp <= hi)
            .map(|t| Entry {
                wp: t.wp,
                n: t.n,
                mu: t.mu,
            })
            .collect();
        entries.sort_unstable_by_key(|e| (e.wp, e.n));
        let dense = match (entries.first(), entries.last()) {
            (Some(f), Some(l)) if dense_fits(f.wp, l.wp, entries.len()) => {
                let span = (l.wp - f.wp) as usize + 1;
                let mut starts = vec![0u32; span + 1];
                for e in &entries {
                    starts[(e.wp - f.wp) as usize + 1] += 1;
                }
                for i in 1..starts.len() {
                    starts[i] += starts[i - 1];
                }
                Some((f.wp, starts))
            }
            _ => None,
        };
        Self { entries, dense }
    }

    #[inline]
    pub fn lookup(&self, w: i128) -> &[Entry] {
        match &self.dense {
            Some((base, starts)) => {
                let k = w - *base as i128;
                if k < 0 || k as usize + 1 >= starts.len() {
                    return &[];
                }
                let k = k as usize;
                &self.entries[starts[k] as usize..starts[k + 1] as usize]
            }
            None => {
                if w < i64::MIN as i128 || w > i64::MAX as i128 {
                    return &[];
                }
                let w = w as i64;
                let lo = self.entries.partition_point(|e| e.wp < w);
                let hi = lo + self.entries[lo..].partition_point(|e| e.wp == w);
                &self.entries[lo..hi]
            }
        }
    }
}

fn dense_fits(lo: i64, hi: i64, len: usize) -> bool {
    let span = hi as i128 - lo as i128 + 1;
    len < u32::MAX as usize && span <= 4 * len as i128 + 1024
}

fn index_bytes(count: u64) -> u64 {
    count * (ENTRY_BYTES + 16)
}

/// Smallest and largest `f + g` over the given terms.
pub(super) fn image_range(a: &[SideTerm], b: &[SideTerm]) -> Option<(i128, i128)> {
    let fa = a.iter().map(|t| t.image as i128);
    let gb = b.iter().map(|t| t.image as i128);
    let (fmin, fmax) = (fa.clone().min()?, fa.max()?);
    let (gmin, gmax) = (gb.clone().min()?, gb.max()?);
    Some((fmin + gmin, fmax + gmax))
}

/// Splits `[lo, hi]` until each window's index fits in `budget` bytes.
pub(super) fn windows(mat: &Materialized, lo: i64, hi: i64, budget: u64) -> Vec<(i64, i64)> {
    let count = mat
        .n3
        .iter()
        .filter(|t| t.mu != 0 && t.wp >= lo && t.wp <= hi)
        .count() as u64;
    if count == 0 {
        return Vec::new();
    }
    if index_bytes(count) <= budget || lo == hi {
        return vec![(lo, hi)];
    }
    let mid = ((lo as i128 + hi as i128).div_euclid(2)) as i64;
    let mut out = windows(mat, lo, mid, budget);
    out.extend(windows(mat, mid + 1, hi, budget));
    out
}

pub(super) fn squarefree_terms(side: &[SideTerm]) -> Vec<SideTerm> {
    side.iter().filter(|t| t.mu != 0).cloned().collect()
}

pub(super) fn run(mat: &Materialized, cfg: &EngineConfig) -> Result<Partial> {
    let a = squarefree_terms(&mat.a);
    let b = squarefree_terms(&mat.b);
    let pairs = a.len() as u128 * b.len() as u128;
    if pairs > cfg.pair_cap {
        return Err(Error::Resource(format!(
            "{pairs} pairs exceed the pair cap {}",
            cfg.pair_cap
        )));
    }
    let Some((smin, smax)) = image_range(&a, &b) else {
        return Ok(Partial::default());
    };
    let m = mat.target_m as i128;
    // wp(n3) = M - f - g
    let lo = (m - smax).max(i64::MIN as i128) as i64;
    let hi = (m - smin).min(i64::MAX as i128) as i64;
    if lo > hi {
        return Ok(Partial::default());
    }
    let mut total = Partial::default();
    for (wlo, whi) in windows(mat, lo, hi, cfg.memory_budget) {
        let index = Index::build(mat, wlo, whi);
        let parts: Vec<Partial> = a
            .par_chunks(cfg.shard_size.max(1))
            .map(|chunk| scan_pairs(chunk, &b, &index, m, wlo, whi, mat.integral))
            .collect();
        total = total + tree_reduce(parts, Partial::default());
    }
    Ok(total)
}

fn scan_pairs(
    chunk: &[SideTerm],
    b: &[SideTerm],
    index: &Index,
    m: i128,
    wlo: i64,
    whi: i64,
    integral: bool,
) -> Partial {
    let mut exact = 0i128;
    let mut approx = CompensatedComplex::new();
    let mut visited = 0u64;
    for ta in chunk {
        let rest = m - ta.image as i128;
        for tb in b {
            visited += 1;
            let w = rest - tb.image as i128;
            if w < wlo as i128 || w > whi as i128 {
                continue;
            }
            let bucket = index.lookup(w);
            if bucket.is_empty() || gcd(ta.n, tb.n) != 1 {
                continue;
            }
            let sign = ta.mu * tb.mu;
            let (wi, wc) = weight_product(ta, tb);
            for e in bucket {
                if gcd(ta.n, e.n) != 1 || gcd(tb.n, e.n) != 1 {
                    continue;
                }
                let mu = sign * e.mu;
                if integral {
                    exact += (wi * mu as i64) as i128;
                } else {
                    approx.add(wc * mu as f64);
                }
            }
        }
    }
    Partial {
        exact,
        approx: approx.value(),
        visited,
    }
}
