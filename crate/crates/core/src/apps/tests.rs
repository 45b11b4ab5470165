use super::*;
use crate::arith::{is_prime_trial, isqrt, mobius_trial};
use crate::collection::{builtin_collection, BuiltinParams};
use crate::engine::{eval_direct, scan_m};

fn opts(strategy: Strategy) -> AppOptions {
    AppOptions {
        strategy,
        ..AppOptions::default()
    }
}

fn all_strategies<F: Fn(&AppOptions) -> Result<AppResult>>(f: F) -> i128 {
    let values: Vec<i128> = [
        Strategy::Direct,
        Strategy::Indexed,
        Strategy::Decomposition,
        Strategy::Scan,
    ]
    .iter()
    .map(|&s| f(&opts(s)).unwrap().exact_value().unwrap())
    .collect();
    assert!(values.windows(2).all(|w| w[0] == w[1]), "{values:?}");
    values[0]
}

fn mu(n: u128) -> i64 {
    mobius_trial(u64::try_from(n).unwrap()) as i64
}

#[test]
fn prime_pair_mobius_examples() {
    assert_eq!(prime_pair_mobius_sum(8).unwrap(), -3);
    for x in [2u64, 5, 30, 199] {
        let mut want = 0;
        for p in (2..=x).filter(|&p| is_prime_trial(p)) {
            for q in (2..=x - p).filter(|&q| is_prime_trial(q)) {
                want += mu((p + q) as u128);
            }
        }
        assert_eq!(prime_pair_mobius_sum(x).unwrap(), want, "x = {x}");
    }
    let r = app_prime_pair_mobius(8).unwrap();
    assert_eq!(r.exact_value(), Some(-3));
    assert_eq!(r.report.trivial_bound, 8);
}

#[test]
fn primes_sum_matches_loop() {
    for (x, a, b) in [(10u64, 0i64, 0i64), (10, 1, 1), (23, 2, -3), (50, 1, 0), (50, -4, 5)] {
        let v = all_strategies(|o| app_primes_sum(x, a, b, None, o));
        let mut want = 0;
        for p in (2..=x).filter(|&p| is_prime_trial(p) && p as i64 > a) {
            for q in (2..=x).filter(|&q| is_prime_trial(q) && q as i64 > b && p + q <= x) {
                let prod = (p as i64 - a) as u128 * (q as i64 - b) as u128 * (p + q) as u128;
                want += mu(prod);
            }
        }
        assert_eq!(v, want as i128, "x={x} a={a} b={b}");
    }
    assert!(app_primes_sum(9, 0, 0, None, &AppOptions::default()).is_err());
    assert!(app_primes_sum(20, 11, 0, None, &AppOptions::default()).is_err());
}

#[test]
fn primes_indexed_hand_table() {
    let primes = [2u64, 3, 5, 7];
    let mut want = 0;
    for k in 1..=4u64 {
        for l in 1..=4u64 {
            let s = primes[k as usize - 1] + primes[l as usize - 1];
            want += mu(k as u128) * mu(l as u128) * mu(k as u128 * l as u128 * s as u128);
        }
    }
    let v = all_strategies(|o| app_primes_indexed(10, o));
    assert_eq!(v, want as i128);
    // gcd / squarefree form of the same sum
    let mut alt = 0;
    for k in 1..=4u64 {
        for l in 1..=4u64 {
            let s = primes[k as usize - 1] + primes[l as usize - 1];
            if crate::arith::gcd(k * l, s) == 1 {
                alt += mu((k * l) as u128).pow(2) * mu(s as u128);
            }
        }
    }
    assert_eq!(v, alt as i128);
    all_strategies(|o| app_primes_indexed(50, o));
}

#[test]
fn squarefree_matches_loop() {
    for (x, nu, a_len) in [(6u64, 2u8, 6u64), (6, 1, 6), (50, 1, 50), (50, 2, 50), (40, 2, 17)] {
        let v = all_strategies(|o| app_squarefree(x, nu, Some(a_len), o));
        let mut want = 0;
        for k in 1..=a_len {
            for l in (1..=a_len).filter(|&l| k + l <= x) {
                want += mu((k * l) as u128).pow(nu as u32) * mu((k + l) as u128);
            }
        }
        assert_eq!(v, want as i128, "x={x} nu={nu} A={a_len}");
    }
    let o = AppOptions::default();
    let one = app_squarefree(50, 1, None, &o).unwrap().exact_value();
    let two = app_squarefree(50, 2, None, &o).unwrap().exact_value();
    assert_ne!(one, two);
    assert!(app_squarefree(50, 3, None, &o).is_err());
}

#[test]
fn beatty_matches_loop() {
    for (x, beta) in [(10u64, 0i64), (10, 1), (37, 0), (50, 2)] {
        let v = all_strategies(|o| app_beatty(x, "sqrt(2)", &beta.to_string(), o));
        // floor(n sqrt 2 + beta) = isqrt(2 n^2) + beta
        let top = isqrt(2 * x * x) as i64 + beta;
        let mut want = 0;
        for n in 1..=top as u64 {
            let s = isqrt(2 * n * n) as i64 + beta;
            for k in 1..=x as i64 {
                let l = s - k;
                if (1..=x as i64).contains(&l) {
                    want += mu(k as u128 * l as u128 * n as u128);
                }
            }
        }
        assert_eq!(v, want as i128, "x={x} beta={beta}");
    }
    let dc0 = builtin_collection(
        "beatty",
        &BuiltinParams {
            x: Some(10),
            alpha: Some("sqrt(2)".into()),
            beta: Some("0".into()),
            ..Default::default()
        },
    )
    .unwrap();
    let dc1 = builtin_collection(
        "beatty",
        &BuiltinParams {
            x: Some(10),
            alpha: Some("sqrt(2)".into()),
            beta: Some("1".into()),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(dc0.interval_n3.hi(), 14);
    assert_eq!(dc1.interval_n3.hi(), 15);
    assert!(app_beatty(10, "n", "0", &AppOptions::default()).is_err());
    assert!(app_beatty(10, "-1", "0", &AppOptions::default()).is_err());
}

fn quadratic_oracle(m: u64) -> i64 {
    let mut want = 0;
    for a in 1..=m {
        for b in 1..=m {
            for c in 1..=2 * m {
                if (a + b + m * m * 4 - c * c % m).is_multiple_of(m) {
                    want += mu(a as u128 * b as u128 * c as u128);
                }
            }
        }
    }
    want
}

#[test]
fn quadratic_matches_triple_loop() {
    // m = 2: a + b = c^2 mod 2 needs a + b even, so (1,1) or (2,2) with any c
    let hand: i64 = (1..=4u128).map(mu).sum::<i64>()
        + (1..=4u128).map(|c| mu(4 * c)).sum::<i64>();
    assert_eq!(quadratic_oracle(2), hand);
    for m in [2u64, 3, 5, 12, 31] {
        let v = all_strategies(|o| app_quadratic(m, o));
        assert_eq!(v, quadratic_oracle(m) as i128, "m = {m}");
    }
    assert!(app_quadratic(1, &AppOptions::default()).is_err());
}

#[test]
fn small_var_examples() {
    let b = BenchmarkParams::default();
    let o = AppOptions::default();
    assert_eq!(app_small_var(6, 6, &b, &o).unwrap().exact_value(), Some(6));
    assert_eq!(app_small_var(6, 1, &b, &o).unwrap().exact_value(), Some(2));
    for n in [7u64, 20, 60] {
        let v = all_strategies(|o| app_small_var(n, n, &b, o));
        let dc = Builtin::PlainTernary { n }.collection().unwrap();
        let s = scan_m(&dc, n as i64, n as i64).unwrap();
        assert_eq!(Some(v), s[0].value.as_exact());
        for h in [1, n / 3, n / 2] {
            let r = app_small_var(n, h.max(1), &b, &o).unwrap();
            let mut want = 0;
            for n3 in 1..=h.max(1) {
                for n1 in 1..n - n3 {
                    want += mu(n1 as u128 * (n - n3 - n1) as u128 * n3 as u128);
                }
            }
            assert_eq!(r.exact_value(), Some(want as i128));
            assert!((0.0..=1.0).contains(&r.normalized));
        }
    }
    let r = app_small_var(100, 10, &b, &o).unwrap();
    let names: Vec<&str> = r.benchmarks.iter().map(|b| b.name.as_str()).collect();
    assert_eq!(names, ["log_power", "exp_sqrt_log", "power"]);
    assert!((r.benchmarks[2].value - 100.0 * 10f64.powf(0.875)).abs() < 1e-9);
    assert!(app_small_var(5, 6, &b, &o).is_err());
}

#[test]
fn direct_is_the_reference_for_every_builtin() {
    let p = |f: &dyn Fn(&mut BuiltinParams)| {
        let mut b = BuiltinParams::default();
        f(&mut b);
        b
    };
    let cases = [
        ("plain_ternary", p(&|b| b.n = Some(40))),
        ("primes_i", p(&|b| b.x = Some(50))),
        ("primes_ii", p(&|b| b.x = Some(50))),
        ("squarefree", p(&|b| {
            b.x = Some(50);
            b.nu = Some(2)
        })),
        ("beatty", p(&|b| {
            b.x = Some(30);
            b.alpha = Some("0.5+0.5*sqrt(5)".into())
        })),
        ("quadratic_residue", p(&|b| b.modulus = Some(31))),
        ("small_var", p(&|b| {
            b.n = Some(60);
            b.h = Some(9)
        })),
    ];
    let engine = Engine::default();
    for (name, params) in cases {
        let dc = builtin_collection(name, &params).unwrap();
        let d = eval_direct(&dc).unwrap();
        for s in [Strategy::Indexed, Strategy::Decomposition, Strategy::Scan] {
            let r = engine.eval(&dc, s).unwrap();
            assert_eq!(r.value, d.value, "{name} {s}");
        }
    }
}

#[test]
fn normalized_in_unit_interval_and_csv() {
    let o = AppOptions::default();
    let rows = vec![
        app_primes_sum(30, 0, 0, None, &o).unwrap(),
        app_primes_indexed(30, &o).unwrap(),
        app_squarefree(30, 1, None, &o).unwrap(),
        app_beatty(30, "sqrt(3)", "0", &o).unwrap(),
        app_quadratic(7, &o).unwrap(),
        app_prime_pair_mobius(30).unwrap(),
    ];
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.normalized), "{}", r.app_name);
    }
    let mut buf = Vec::new();
    write_app_csv(&mut buf, &rows[4..5]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let want = oracle_row(7);
    assert_eq!(text, format!("{APP_CSV_HEADER}\n{want}\n"));
    assert!(run_app("nope", &AppParams::default(), &o).is_err());
    assert!(run_app("beatty", &AppParams::default(), &o).is_err());
}

fn oracle_row(m: u64) -> String {
    let v = quadratic_oracle(m);
    let r = app_quadratic(m, &AppOptions::default()).unwrap();
    format!(
        "quadratic,m={m},indexed,0,{v},0,{},{:.16e},{}",
        2 * m * 2 * m,
        v.unsigned_abs() as f64 / (2 * m * m) as f64,
        r.report.terms_visited
    )
}
