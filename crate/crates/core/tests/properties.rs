use mtl_core::arith::{gcd, mobius_trial, prime_factors_trial};
use mtl_core::bracket::{eval_bracket, eval_i64, eval_phase, rem_bracket, BracketExpr, BracketValue, EvalGuardConfig};
use mtl_core::collection::{random_collection, Builtin, MapSpec};
use mtl_core::engine::{eval_decomposition, eval_direct, eval_indexed, scan_m, Engine, EngineConfig};
use mtl_core::goldbach::{exponent_b, exponent_c, singular_series_with_cutoff};
use mtl_core::sieve::{mertens, mobius_range, sieve_block};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn poly(coeffs: &[i64]) -> String {
    let mut terms = vec![format!("({})", coeffs[0])];
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        terms.push(format!("({c})*n^{k}"));
    }
    terms.join(" + ")
}

fn big_poly(coeffs: &[i64], n: i64) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::from(0), |acc, &c| acc * BigInt::from(n) + BigInt::from(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn integer_polynomials_evaluate_exactly(
        coeffs in prop::collection::vec(-10_000_000i64..=10_000_000, 1..7),
        n in -10_000_000i64..=10_000_000,
    ) {
        let p = BracketExpr::parse(&poly(&coeffs)).unwrap();
        prop_assert!(p.is_integer_polynomial());
        let got = eval_bracket(&p, n, &EvalGuardConfig::default()).unwrap();
        prop_assert_eq!(got, BracketValue::Integer(big_poly(&coeffs, n)));
    }

    #[test]
    fn remainder_in_range_and_congruent(
        coeffs in prop::collection::vec(-1000i64..=1000, 1..4),
        m in 1u64..=1000,
        n in -1000i64..=1000,
    ) {
        let inner = BracketExpr::parse(&poly(&coeffs)).unwrap().declare_integer_valued();
        let r = rem_bracket(&inner, m).unwrap();
        let v = eval_i64(&r, n, &EvalGuardConfig::default()).unwrap();
        let full = big_poly(&coeffs, n);
        prop_assert!((0..m as i64).contains(&v));
        let diff = full - BigInt::from(v);
        prop_assert_eq!(diff % BigInt::from(m), BigInt::from(0));
    }

    #[test]
    fn escalated_precision_changes_nothing(
        a in 2u64..50,
        b in 2u64..50,
        n in -5000i64..=5000,
        bits in 192u32..=900,
    ) {
        let text = format!("floor(sqrt({a})*n) * frac(sqrt({b})*n^2) + floor(pi*floor(e*n))");
        let p = BracketExpr::parse(&text).unwrap();
        let base = EvalGuardConfig::default();
        let high = EvalGuardConfig { precision_bits: bits, ..base };
        let x = eval_phase(&p, n, &base);
        let y = eval_phase(&p, n, &high);
        match (x, y) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (x, y) => prop_assert!(x.is_err() && y.is_err()),
        }
    }

    #[test]
    fn mobius_and_divisors_multiplicative(a in 1u64..200_000, b in 1u64..200_000) {
        prop_assume!(gcd(a, b) == 1);
        let at = |n: u64| {
            let blk = sieve_block(n, n).unwrap();
            (blk.mu(n), blk.tau(n))
        };
        let (ma, ta) = at(a);
        let (mb, tb) = at(b);
        let (mab, tab) = at(a * b);
        prop_assert_eq!(mab, ma * mb);
        prop_assert_eq!(tab, ta * tb);
        prop_assert_eq!(mab, mobius_trial(a * b));
    }

    #[test]
    fn mertens_differences_are_interval_sums(x in 1u64..200_000, len in 0u64..50_000) {
        let y = x + len;
        let sum: i64 = if len == 0 {
            0
        } else {
            mobius_range(x + 1, y).unwrap().iter().map(|&m| m as i64).sum()
        };
        prop_assert_eq!(mertens(y).unwrap() - mertens(x).unwrap(), sum);
    }

    #[test]
    fn affine_maps_injective_unless_flat(s in -5i64..=5, t in -100i64..=100, n in 3u64..40) {
        let mut dc = Builtin::PlainTernary { n }.collection().unwrap();
        dc.f = MapSpec::Affine { s, t };
        let report = dc.validate();
        prop_assert_eq!(report.is_valid(), s != 0);
        if s != 0 {
            let ns: Vec<u64> = (1..=n).collect();
            let mut img = dc.f.images(&ns, dc.interval_a).unwrap();
            img.sort_unstable();
            img.dedup();
            prop_assert_eq!(img.len() as u64, n);
        }
    }

    #[test]
    fn exponent_relation_holds(den in 2i64..=10_000_000, frac in 0.0f64..1.0) {
        let lo = (den + 1) / 2;
        let num = lo + ((den - lo) as f64 * frac) as i64;
        prop_assume!(num < den);
        let sigma = BigRational::new(num.into(), den.into());
        let b = exponent_b(&sigma).unwrap();
        let c = exponent_c(&sigma).unwrap();
        let two = BigRational::from_integer(2.into());
        prop_assert_eq!(c.clone(), (b.clone() + BigRational::one()) / two);
        prop_assert!(b >= BigRational::new(3.into(), 4.into()) && b < BigRational::one());
        prop_assert!(b >= sigma);
    }

    #[test]
    fn singular_series_depends_on_radical(m in 1u64..1_000_000, k in 1u32..4) {
        let primes = prime_factors_trial(m);
        let p = *primes.first().unwrap_or(&2);
        let a = singular_series_with_cutoff(m, 1 << 16).unwrap().value;
        let mult = p.checked_pow(k).and_then(|q| q.checked_mul(m));
        prop_assume!(mult.is_some());
        let b = singular_series_with_cutoff(mult.unwrap(), 1 << 16).unwrap().value;
        prop_assert_eq!(a, b);
        if m % 2 == 1 && p != 2 {
            prop_assert_eq!(a, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strategies_agree_on_random_collections(seed in any::<u64>(), max in 2u64..40) {
        let dc = random_collection(seed, max);
        let d = eval_direct(&dc).unwrap();
        let i = eval_indexed(&dc).unwrap();
        let (p, trace) = eval_decomposition(&dc, None).unwrap();
        let m = dc.target_m;
        let s = scan_m(&dc, m, m).unwrap();
        prop_assert!(d.value.agrees(&i.value, 1e-9));
        prop_assert!(d.value.agrees(&p.value, 1e-9));
        prop_assert!(d.value.agrees(&s[0].value, 1e-9));
        prop_assert!(d.value.agrees(&trace.partial_reconstruction, 1e-9));
        prop_assert!(d.value.abs() <= d.trivial_bound as f64 + 1e-9);
    }

    #[test]
    fn tight_memory_budget_gives_same_value(seed in any::<u64>()) {
        let dc = random_collection(seed, 40);
        let small = Engine::new(EngineConfig { memory_budget: 256, shard_size: 2, ..EngineConfig::default() });
        let a = small.eval_indexed(&dc);
        let b = eval_indexed(&dc).unwrap();
        if let Ok(a) = a {
            prop_assert!(a.value.agrees(&b.value, 1e-9), "{} vs {}", a.value, b.value);
        }
    }
}
