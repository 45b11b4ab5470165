//! `S(D; M)` for every `M` in a range.
//!
//! Pairs are bucketed by `s = f(n1) + g(n2)`; each `n3` then contributes to
//! `M = s + wp(n3)` for the pairs whose `s` falls in the window the range
//! allows. The range is cut into fixed chunks that are filled
//! independently; pairs are built in blocks of `n1` that fit the memory
//! budget.

use super::decomp::{pair_index, Pair};
use super::indexed::squarefree_terms;
use super::{EngineConfig, Partial};
use crate::accum::CompensatedComplex;
use crate::arith::gcd;
use crate::collection::{Materialized, N3Term};
use crate::error::Result;
use rayon::prelude::*;

const CHUNK: i64 = 4096;

#[derive(Clone, Copy, Default)]
struct Bucket {
    exact: i128,
    approx: CompensatedComplex,
    visited: u64,
}

pub(super) fn run(mat: &Materialized, lo: i64, hi: i64, cfg: &EngineConfig) -> Result<Vec<Partial>> {
    let len = (hi - lo + 1) as usize;
    let mut total = vec![Bucket::default(); len];
    let a = squarefree_terms(&mat.a);
    let b = squarefree_terms(&mat.b);
    let n3: Vec<N3Term> = mat.n3.iter().filter(|t| t.mu != 0).copied().collect();
    let pair_bytes = std::mem::size_of::<Pair>() as u64;
    let per_a = (b.len() as u64 * pair_bytes).max(1);
    let a_block = (cfg.memory_budget / per_a).max(1) as usize;
    for a_chunk in a.chunks(a_block) {
        let pairs = pair_index(a_chunk, &b);
        if pairs.is_empty() {
            continue;
        }
        let chunks: Vec<(i64, i64)> = (0..)
            .map(|k| lo as i128 + k as i128 * CHUNK as i128)
            .take_while(|&c| c <= hi as i128)
            .map(|c| (c as i64, (c + CHUNK as i128 - 1).min(hi as i128) as i64))
            .collect();
        let filled: Vec<Vec<Bucket>> = chunks
            .par_iter()
            .map(|&(clo, chi)| fill(&pairs, &n3, clo, chi, mat.integral))
            .collect();
        for ((clo, _), part) in chunks.iter().zip(filled) {
            let off = (clo - lo) as usize;
            for (i, bkt) in part.into_iter().enumerate() {
                let t = &mut total[off + i];
                t.exact += bkt.exact;
                t.approx.add(bkt.approx.value());
                t.visited += bkt.visited;
            }
        }
    }
    Ok(total
        .into_iter()
        .map(|b| Partial {
            exact: b.exact,
            approx: b.approx.value(),
            visited: b.visited,
        })
        .collect())
}

fn fill(pairs: &[Pair], n3: &[N3Term], clo: i64, chi: i64, integral: bool) -> Vec<Bucket> {
    let mut out = vec![Bucket::default(); (chi - clo + 1) as usize];
    for t in n3 {
        let s_lo = clo as i128 - t.wp as i128;
        let s_hi = chi as i128 - t.wp as i128;
        let start = pairs.partition_point(|p| p.s < s_lo);
        for p in pairs[start..].iter().take_while(|p| p.s <= s_hi) {
            let bkt = &mut out[(p.s + t.wp as i128 - clo as i128) as usize];
            bkt.visited += 1;
            if gcd(p.n1, t.n) != 1 || gcd(p.n2, t.n) != 1 {
                continue;
            }
            let sign = p.mu12 * t.mu;
            if integral {
                bkt.exact += (p.wi * sign as i64) as i128;
            } else {
                bkt.approx.add(p.wc * sign as f64);
            }
        }
    }
    out
}
