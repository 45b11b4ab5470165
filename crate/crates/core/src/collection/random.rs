//! Seeded random small collections for cross-checking the strategies.

use super::{DataCollection, Interval, MapSpec, WeightSpec};
use crate::bracket::{eval_i64, rem_bracket, BracketExpr, EvalGuardConfig};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A valid collection with intervals inside `[1, max]`, table weights and
/// injective table maps. About one seed in five uses complex weights; the
/// rest use weights in `{-1, 0, 1}`.
pub fn random_collection(seed: u64, max: u64) -> DataCollection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = max.max(2);
    let interval = |rng: &mut ChaCha8Rng| {
        let lo = rng.random_range(1..=max / 4 + 1);
        let hi = rng.random_range(lo..=max);
        Interval::new(lo, hi).unwrap()
    };
    let (ia, ib, in3) = (interval(&mut rng), interval(&mut rng), interval(&mut rng));
    let complex = rng.random_range(0..5) == 0;
    let weights = |rng: &mut ChaCha8Rng, iv: Interval| {
        let values = (0..iv.len())
            .map(|_| {
                if complex {
                    let r: f64 = rng.random_range(0.0..=1.0);
                    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(r, t)
                } else {
                    Complex64::new(rng.random_range(-1i32..=1) as f64, 0.0)
                }
            })
            .collect();
        WeightSpec::Table { values }
    };
    // images drawn from a range barely wider than the interval, so that
    // many pairs share a sum
    let map = |rng: &mut ChaCha8Rng, iv: Interval| {
        let picks = sample(rng, iv.len() as usize + 6, iv.len() as usize);
        let shift = rng.random_range(-3..=max as i64 / 2);
        MapSpec::Table {
            values: picks.into_iter().map(|v| v as i64 + shift).collect(),
        }
    };
    let wp = match rng.random_range(0..4) {
        0 | 1 => BracketExpr::parse("-n").unwrap().declare_integer_valued(),
        2 => BracketExpr::parse("n - 2*n*n + floor(n*n*1.5)")
            .unwrap()
            .declare_integer_valued()
            .negated(),
        _ => rem_bracket(
            &BracketExpr::parse("3*n^2 + 1").unwrap().declare_integer_valued(),
            max + 7,
        )
        .unwrap()
        .negated(),
    };
    let mut dc = DataCollection {
        u: weights(&mut rng, ia),
        v: weights(&mut rng, ib),
        f: map(&mut rng, ia),
        g: map(&mut rng, ib),
        interval_a: ia,
        interval_b: ib,
        interval_n3: in3,
        wp,
        target_m: 0,
        guard: EvalGuardConfig::default(),
    };
    // aim M at a value some triple actually attains
    let pick = |rng: &mut ChaCha8Rng, iv: Interval| rng.random_range(0..iv.len()) as usize;
    let (MapSpec::Table { values: f }, MapSpec::Table { values: g }) = (&dc.f, &dc.g) else {
        unreachable!()
    };
    let n3 = in3.lo() + pick(&mut rng, in3) as u64;
    let w = eval_i64(&dc.wp, n3 as i64, &dc.guard).unwrap();
    dc.target_m = f[pick(&mut rng, ia)] + g[pick(&mut rng, ib)] + w;
    dc
}
