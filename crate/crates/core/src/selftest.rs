//! A compact run of the library's invariants, used by the command line.

use crate::apps::{app_small_var, prime_pair_mobius_sum, AppOptions, BenchmarkParams};
use crate::arith::{is_prime_trial, mobius_trial};
use crate::bracket::{eval_i64, rem_bracket, BracketExpr, EvalGuardConfig};
use crate::collection::{random_collection, Builtin};
use crate::engine::{eval_decomposition, eval_direct, eval_indexed, scan_m};
use crate::expsum::{grid_max_both, mu_exp_sum};
use crate::goldbach::{
    exponent_value, parse_rational, r1_all_with, singular_series_with_cutoff, R1Method,
    DEFAULT_FFT_BUDGET,
};
use crate::sieve::{map_blocks, mertens, sieve_block_with};
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    pub quick: bool,
    pub seed: u64,
}

type Outcome = std::result::Result<String, String>;
type Check = (&'static str, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

fn divisor_count(n: u64) -> u32 {
    let mut c = 0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            c += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    c
}

fn hand_anchors() -> Outcome {
    let s = |n| {
        eval_direct(&Builtin::PlainTernary { n }.collection().map_err(e)?)
            .map_err(e)
            .map(|r| r.value.as_exact())
    };
    ensure(s(6)? == Some(6), || "S(6) != 6".into())?;
    ensure(s(5)? == Some(-3), || "S(5) != -3".into())?;
    let sv = app_small_var(6, 1, &BenchmarkParams::default(), &AppOptions::default()).map_err(e)?;
    ensure(sv.exact_value() == Some(2), || "S(H=1, N=6) != 2".into())?;
    ensure(prime_pair_mobius_sum(8).map_err(e)? == -3, || "prime pair sum at 8 != -3".into())?;
    ensure(mertens(10).map_err(e)? == -1, || "M(10) != -1".into())?;
    Ok("S(6)=6, S(5)=-3, S(1,6)=2, pair sum -3, M(10)=-1".into())
}

fn exponents(seed: u64) -> Outcome {
    let q = |s: &str| parse_rational(s).unwrap();
    let v = |s: &str| exponent_value(&q(s)).map_err(e);
    ensure(v("1/2")?.b == q("3/4") && v("1/2")?.c == q("7/8"), || "sigma = 1/2".into())?;
    for s in ["4/7", "3/5"] {
        ensure(v(s)?.b == q("4/5") && v(s)?.c == q("9/10"), || format!("sigma = {s}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let den: i64 = rng.random_range(2..=100_000);
        let num: i64 = rng.random_range(den / 2 + den % 2..den);
        let sigma = BigRational::new(num.into(), den.into());
        let ev = exponent_value(&sigma).map_err(e)?;
        let two = BigRational::from_integer(2.into());
        ensure(ev.c == (ev.b + BigRational::one()) / two, || format!("c != (b+1)/2 at {sigma}"))?;
    }
    Ok("table exact; c = (b+1)/2 on 1000 random rationals".into())
}

fn sieve(limit: u64) -> Outcome {
    let b = sieve_block_with(1, limit, limit).map_err(e)?;
    for n in 1..=limit {
        ensure(b.mu(n) == mobius_trial(n), || format!("mu({n})"))?;
        ensure(b.tau(n) == divisor_count(n), || format!("tau({n})"))?;
        ensure(b.is_prime(n) == is_prime_trial(n), || format!("prime({n})"))?;
    }
    let parts = map_blocks(1, limit, 977, |blk| (blk.mu_slice().to_vec(), blk.tau_slice().to_vec()))
        .map_err(e)?;
    let (mu, tau): (Vec<Vec<i8>>, Vec<Vec<u32>>) = parts.into_iter().unzip();
    ensure(mu.concat() == b.mu_slice() && tau.concat() == b.tau_slice(), || {
        "block partition changed the sieve".into()
    })?;
    Ok(format!("mu, tau, primality agree with trial division to {limit}"))
}

fn strategies(count: u64, seed: u64) -> Outcome {
    for s in seed..seed + count {
        let dc = random_collection(s, 40);
        let d = eval_direct(&dc).map_err(e)?;
        let i = eval_indexed(&dc).map_err(e)?;
        let (p, _) = eval_decomposition(&dc, None).map_err(e)?;
        let m = dc.target_m;
        let sc = scan_m(&dc, m, m).map_err(e)?;
        for (name, v) in [("indexed", i.value), ("decomposition", p.value), ("scan", sc[0].value)] {
            ensure(d.value.agrees(&v, 1e-9), || {
                format!("seed {s}: direct {} vs {name} {}", d.value, v)
            })?;
        }
    }
    Ok(format!("{count} random collections agree across all strategies"))
}

fn expsums(n: u64) -> Outcome {
    let close = |a: num_complex::Complex64, b: num_complex::Complex64| {
        (a - b).norm() <= 1e-9 * a.norm().max(b.norm()).max(1.0)
    };
    for alpha in [0.1234567, 0.5, std::f64::consts::FRAC_1_SQRT_2] {
        let f = mu_exp_sum(n, alpha, 1, 0).map_err(e)?;
        let g = mu_exp_sum(n, 1.0 - alpha, 1, 0).map_err(e)?;
        ensure((f.abs_value - g.abs_value).abs() <= 1e-9 * f.abs_value.max(1.0), || {
            format!("reflection at alpha = {alpha}")
        })?;
        for d in 1..=8 {
            let mut total = num_complex::Complex64::new(0.0, 0.0);
            for a in 0..d {
                total += mu_exp_sum(n, alpha, d, a).map_err(e)?.value;
            }
            ensure(close(total, f.value), || format!("partition d = {d}, alpha = {alpha}"))?;
        }
    }
    let (fft, direct) = grid_max_both(n, 256).map_err(e)?;
    ensure((fft - direct).abs() <= 1e-8 * direct.max(1.0), || {
        format!("grid max {fft} vs {direct}")
    })?;
    Ok(format!("reflection, partition and grid checks at N = {n}"))
}

fn goldbach(x: u64) -> Outcome {
    for m in [1u64, 9, 101] {
        let s = singular_series_with_cutoff(m, 1000).map_err(e)?;
        ensure(s.value == 0.0, || format!("S_1({m}) != 0"))?;
    }
    for (m, rad) in [(12u64, 6u64), (360, 30), (2048, 2)] {
        let a = singular_series_with_cutoff(m, 1 << 16).map_err(e)?.value;
        let b = singular_series_with_cutoff(rad, 1 << 16).map_err(e)?.value;
        ensure(a == b, || format!("S_1({m}) != S_1({rad})"))?;
    }
    let d = r1_all_with(x, R1Method::Direct, DEFAULT_FFT_BUDGET).map_err(e)?;
    let f = r1_all_with(x, R1Method::Fft, DEFAULT_FFT_BUDGET).map_err(e)?;
    let mut worst = 0.0f64;
    for (a, b) in d.iter().zip(&f) {
        if *a == 0.0 {
            ensure(*b == 0.0, || "convolution nonzero where R1 vanishes".into())?;
        } else {
            worst = worst.max((a - b).abs() / a.abs());
        }
    }
    ensure(worst <= 1e-6, || format!("R1 paths differ by {worst:e}"))?;
    Ok(format!("series zeros and radicals; R1 paths within {worst:.1e} at x = {x}"))
}

fn bracket(seed: u64) -> Outcome {
    let guard = EvalGuardConfig::default();
    let p = BracketExpr::parse("3*n^3 - 7*n^2 + n - 11").map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let n: i64 = rng.random_range(-100_000..=100_000);
        let want = 3 * (n as i128).pow(3) - 7 * (n as i128).pow(2) + n as i128 - 11;
        let got = eval_i64(&p, n, &guard).map_err(e)?;
        ensure(got as i128 == want, || format!("polynomial at n = {n}"))?;
    }
    for m in [2u64, 7, 1000] {
        let r = rem_bracket(&BracketExpr::parse("n^2 + 1").unwrap().declare_integer_valued(), m)
            .map_err(e)?;
        for n in -50i64..=50 {
            let v = eval_i64(&r, n, &guard).map_err(e)?;
            let want = (n * n + 1).rem_euclid(m as i64);
            ensure(v == want, || format!("rem at m = {m}, n = {n}"))?;
        }
    }
    Ok("integer polynomial and remainder evaluation exact".into())
}

pub fn run_selftest(opts: SelftestOptions) -> Vec<SelfCheck> {
    let (sieve_to, collections, exp_n, r1_x) = if opts.quick {
        (10_000, 20, 10_000, 10_000)
    } else {
        (100_000, 100, 100_000, 100_000)
    };
    let seed = opts.seed;
    let checks: Vec<Check> = vec![
        ("hand_anchors", Box::new(hand_anchors)),
        ("exponent_table", Box::new(move || exponents(seed))),
        ("sieve_vs_trial_division", Box::new(move || sieve(sieve_to))),
        ("strategy_equivalence", Box::new(move || strategies(collections, seed))),
        ("exp_sum_identities", Box::new(move || expsums(exp_n))),
        ("goldbach_kit", Box::new(move || goldbach(r1_x))),
        ("bracket_evaluator", Box::new(move || bracket(seed))),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            let t0 = Instant::now();
            let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(&f))
                .unwrap_or_else(|_| Err("panicked".into()));
            let (passed, detail) = match out {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SelfCheck {
                name: name.to_string(),
                passed,
                detail,
                seconds: t0.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_selftest_passes() {
        let checks = run_selftest(SelftestOptions { quick: true, seed: 7 });
        assert_eq!(checks.len(), 7);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
