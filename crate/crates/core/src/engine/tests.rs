use super::*;
use crate::arith::mobius_trial;
use crate::collection::{random_collection, Builtin, Interval, WeightSpec};

fn plain(n: u64) -> DataCollection {
    Builtin::PlainTernary { n }.collection().unwrap()
}

/// Plain enumeration of ordered triples summing to `n`.
fn ternary_oracle(n: u64) -> i64 {
    let mut s = 0;
    for a in 1..n {
        for b in 1..n - a {
            let c = n - a - b;
            s += mobius_trial(a * b * c) as i64;
        }
    }
    s
}

fn all_strategies(dc: &DataCollection) -> [SumValue; 4] {
    let e = Engine::default();
    let m = dc.target_m;
    [
        e.eval_direct(dc).unwrap().value,
        e.eval_indexed(dc).unwrap().value,
        e.eval_decomposition(dc, None).unwrap().0.value,
        e.scan_m(dc, m, m).unwrap()[0].value,
    ]
}

#[test]
fn mu_of_triple_examples() {
    assert_eq!(mu_of_triple([1, 2, 3], [1, -1, -1]), 1);
    assert_eq!(mu_of_triple([2, 2, 2], [-1, -1, -1]), 0);
    let n = [6u64, 35, 143];
    let mu = n.map(mobius_trial);
    assert_eq!(mu_of_triple(n, mu), mobius_trial(30030));
    assert_eq!(mu_of_triple(n, mu), 1);
}

#[test]
fn hand_anchors() {
    for v in all_strategies(&plain(6)) {
        assert_eq!(v, SumValue::Exact(6));
    }
    for v in all_strategies(&plain(5)) {
        assert_eq!(v, SumValue::Exact(-3));
    }
    let sv = Builtin::SmallVar { n: 6, h: 1 }.collection().unwrap();
    for v in all_strategies(&sv) {
        assert_eq!(v, SumValue::Exact(2));
    }
}

#[test]
fn plain_ternary_matches_enumeration() {
    for n in [3u64, 7, 12, 30] {
        let want = ternary_oracle(n) as i128;
        for v in all_strategies(&plain(n)) {
            assert_eq!(v, SumValue::Exact(want), "N = {n}");
        }
    }
}

#[test]
fn empty_n3_gives_zero() {
    let mut dc = plain(6);
    dc.interval_n3 = Interval::new(1, 0).unwrap();
    for v in all_strategies(&dc) {
        assert_eq!(v, SumValue::Exact(0));
    }
}

#[test]
fn single_point_n3_uses_only_d_one() {
    let mut dc = plain(8);
    dc.interval_n3 = Interval::new(1, 1).unwrap();
    let (rep, trace) = eval_decomposition(&dc, None).unwrap();
    assert_eq!(trace.d_values, vec![1]);
    assert_eq!(trace.i_of_d[0], rep.value);
    assert_eq!(rep.value, eval_direct(&dc).unwrap().value);
}

#[test]
fn decomposition_trace_splits() {
    let dc = plain(40);
    let (rep, trace) = eval_decomposition(&dc, Some(10)).unwrap();
    let (s, l) = (
        trace.small_d_sum.as_exact().unwrap(),
        trace.large_d_sum.as_exact().unwrap(),
    );
    assert_eq!(SumValue::Exact(s + l), rep.value);
    assert_eq!(trace.partial_reconstruction, rep.value);
    assert!(eval_decomposition(&dc, Some(1)).is_err());
    assert!(eval_decomposition(&dc, Some(41)).is_err());
    let e = Engine::default();
    for d in 41..50 {
        assert_eq!(e.i_of_d(&dc, d).unwrap(), SumValue::Exact(0));
    }
}

#[test]
fn random_collections_agree() {
    for seed in 0..30 {
        let dc = random_collection(seed, 40);
        let vals = all_strategies(&dc);
        for v in &vals[1..] {
            assert!(vals[0].agrees(v, 1e-9), "seed {seed}: {vals:?}");
        }
    }
}

#[test]
fn scan_entries() {
    let dc = plain(20);
    let reps = scan_m(&dc, 3, 60).unwrap();
    assert_eq!(reps.len(), 58);
    assert_eq!(reps[2].target_m, 5);
    assert_eq!(reps[2].value, SumValue::Exact(-3));
    assert_eq!(reps[3].value, SumValue::Exact(6));
    for r in &reps {
        let want = eval_indexed(&dc.with_target(r.target_m)).unwrap().value;
        assert_eq!(r.value, want, "M = {}", r.target_m);
    }
    for r in scan_m(&dc, 100, 120).unwrap() {
        assert_eq!(r.value, SumValue::Exact(0));
    }
}

#[test]
fn windowed_index_matches() {
    let tiny = Engine::new(EngineConfig {
        memory_budget: 256,
        ..EngineConfig::default()
    });
    for seed in [3u64, 8, 21] {
        let dc = random_collection(seed, 40);
        assert!(tiny
            .eval_indexed(&dc)
            .unwrap()
            .value
            .agrees(&eval_direct(&dc).unwrap().value, 1e-12));
        let m = dc.target_m;
        let a = tiny.scan_m(&dc, m - 3, m + 3).unwrap();
        let b = scan_m(&dc, m - 3, m + 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.value.agrees(&y.value, 1e-12));
        }
    }
}

#[test]
fn zero_weights_and_conjugation() {
    let mut dc = random_collection(4, 30);
    dc.u = WeightSpec::Table {
        values: vec![Complex64::new(0.0, 0.0); dc.interval_a.len() as usize],
    };
    assert!(eval_indexed(&dc).unwrap().value.abs() == 0.0);

    let seed = (0..200)
        .find(|&s| !random_collection(s, 30).is_integral())
        .unwrap();
    let dc = random_collection(seed, 30);
    let conj = |w: &WeightSpec| match w {
        WeightSpec::Table { values } => WeightSpec::Table {
            values: values.iter().map(|z| z.conj()).collect(),
        },
        other => other.clone(),
    };
    let mut dc2 = dc.clone();
    dc2.u = conj(&dc.u);
    dc2.v = conj(&dc.v);
    let a = eval_direct(&dc).unwrap().value.to_complex();
    let b = eval_direct(&dc2).unwrap().value.to_complex();
    assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
}

#[test]
fn trivial_bound_holds() {
    for seed in 0..20 {
        let dc = random_collection(seed, 40);
        let r = eval_indexed(&dc).unwrap();
        assert!(r.value.abs() <= r.trivial_bound as f64 + 1e-9);
        assert!((0.0..=1.0).contains(&r.savings_ratio));
    }
}

#[test]
fn thread_count_does_not_change_bits() {
    let seed = (0..200)
        .find(|&s| !random_collection(s, 40).is_integral())
        .unwrap();
    let dc = random_collection(seed, 40);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let e = Engine::new(EngineConfig {
                    shard_size: 3,
                    ..EngineConfig::default()
                });
                (
                    e.eval_indexed(&dc).unwrap().value,
                    e.eval_direct(&dc).unwrap().value,
                )
            })
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(format!("{:?}", one), format!("{:?}", four));
}

#[test]
fn direct_cap_is_enforced() {
    let e = Engine::new(EngineConfig {
        direct_cap: 100,
        ..EngineConfig::default()
    });
    let err = e.eval_direct(&plain(10)).unwrap_err();
    assert!(matches!(err, Error::Resource(_)));
    assert!(e.eval_indexed(&plain(10)).is_ok());
}

#[test]
fn csv_rows() {
    let r = eval_direct(&plain(6)).unwrap();
    assert_eq!(r.csv_row(false), "direct,6,6,0,36,1.6666666666666666e-1,216,");
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &[r], false).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with(REPORT_CSV_HEADER));
}
