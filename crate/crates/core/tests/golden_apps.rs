//! Regression rows for the application sums at moderate sizes.

use mtl_core::apps::{run_app, AppOptions, AppParams, APP_CSV_HEADER};
use mtl_core::engine::Strategy;
use mtl_core::goldbach::parse_rational;

fn params(text: &str) -> AppParams {
    let mut p = AppParams::default();
    for kv in text.split(';') {
        let (k, v) = kv.split_once('=').unwrap();
        let int = || v.parse::<u64>().unwrap();
        match k {
            "A" => p.a_len = Some(int()),
            "a" => p.a = Some(v.parse().unwrap()),
            "b" => p.b = Some(v.parse().unwrap()),
            "x" => p.x = Some(int()),
            "nu" => p.nu = Some(v.parse().unwrap()),
            "alpha" => p.alpha = Some(v.into()),
            "beta" => p.beta = Some(v.into()),
            "m" => p.m = Some(int()),
            "N" => p.n = Some(int()),
            "H" => p.h = Some(int()),
            "C" => p.bench.log_power = v.parse().unwrap(),
            "c" => p.bench.exp_constant = v.parse().unwrap(),
            "sigma" => p.bench.sigma = parse_rational(v).unwrap(),
            other => panic!("unknown key {other}"),
        }
    }
    p
}

#[test]
fn app_rows_match_golden_file() {
    let text = include_str!("golden/apps.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(APP_CSV_HEADER));
    let mut count = 0;
    for line in lines {
        let cols: Vec<&str> = line.splitn(3, ',').collect();
        let strategy = match cols[2].split(',').next().unwrap() {
            "direct" => Strategy::Direct,
            _ => Strategy::Indexed,
        };
        let opts = AppOptions {
            strategy,
            ..AppOptions::default()
        };
        let r = run_app(cols[0], &params(cols[1]), &opts).unwrap();
        assert_eq!(r.csv_row(), line);
        assert!(r.normalized < 0.05, "{}", r.app_name);
        count += 1;
    }
    assert_eq!(count, 9);
}
