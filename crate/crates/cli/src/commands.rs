use crate::args::*;
use crate::config::Run;
use crate::config_error;
use crate::output::Output;
use anyhow::{Context, Result};
use mtl_core::apps::{run_app, write_app_csv, AppOptions, AppParams, BenchmarkParams};
use mtl_core::bracket::{BracketExpr, EvalGuardConfig};
use mtl_core::collection::{builtin_collection, random_collection, BuiltinParams, CollectionConfig};
use mtl_core::engine::{write_reports_csv, Engine, EngineConfig, Strategy, SumReport};
use mtl_core::expsum::{
    fit_decay, mu_bracket_exp_sum, mu_exp_sum, mu_short_interval_sum, sup_scan, sup_scan_direct,
    write_expsum_csv, DecayModel, SupScanResult, SCAN_CSV_HEADER,
};
use mtl_core::goldbach::{
    exponent_value, parse_rational, r1, r1_all_with, singular_series,
    singular_series_with_cutoff, vaughan_compare_with, write_exponent_csv, write_r1_csv,
    write_series_csv, CompareWeight, R1Method, COMPARE_CSV_HEADER, DEFAULT_FFT_BUDGET,
    R1_CSV_HEADER,
};
use mtl_core::selftest::{run_selftest, SelftestOptions};
use mtl_core::sieve::cache::SieveCache;
use mtl_core::sieve::{map_blocks, SieveBlock, DEFAULT_BLOCK_CAPACITY};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::io::Write as _;

fn engine_config(run: &Run) -> EngineConfig {
    let mut c = EngineConfig::default();
    if let Some(m) = run.max_iterations {
        c.direct_cap = m as u128;
        c.pair_cap = m as u128;
    }
    if let Some(b) = run.budget_mem {
        c.memory_budget = b;
    }
    c
}

fn to_json<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn utf8(buf: Vec<u8>) -> Result<String> {
    String::from_utf8(buf).context("output is not UTF-8")
}

fn sieve_rows(b: &SieveBlock, csv: &mut String, rows: &mut Vec<Value>) {
    for n in b.lo()..=b.hi() {
        let (mu, tau, spf, p) = (b.mu(n), b.tau(n), b.spf(n), b.is_prime(n));
        let _ = writeln!(csv, "{n},{mu},{tau},{spf},{}", p as u8);
        rows.push(json!({"n": n, "mu": mu, "tau": tau, "spf": spf, "prime": p}));
    }
}

pub fn sieve(run: &Run, a: &SieveArgs) -> Result<Output> {
    if a.lo < 1 || a.hi < a.lo {
        return Err(config_error("sieve interval needs 1 <= lo <= hi"));
    }
    let len = a.hi - a.lo + 1;
    let cached = match &run.sieve_cache {
        Some(dir) => Some(
            SieveCache::new(dir, len.max(DEFAULT_BLOCK_CAPACITY)).load_or_compute(a.lo, a.hi)?,
        ),
        None => None,
    };
    if a.summary {
        let tally = |b: &SieveBlock| {
            let mu: i64 = b.mu_slice().iter().map(|&m| m as i64).sum();
            (mu, b.prime_bits().count_ones() as u64)
        };
        let parts = match &cached {
            Some(b) => vec![tally(b)],
            None => map_blocks(a.lo, a.hi, DEFAULT_BLOCK_CAPACITY, tally)?,
        };
        let (mu_sum, primes) = parts
            .into_iter()
            .fold((0i64, 0u64), |(s, p), (a, b)| (s + a, p + b));
        return Ok(Output {
            csv: format!("lo,hi,mu_sum,prime_count\n{},{},{mu_sum},{primes}\n", a.lo, a.hi),
            json: json!([{"lo": a.lo, "hi": a.hi, "mu_sum": mu_sum, "prime_count": primes}]),
            failed: false,
        });
    }
    let mut csv = String::from("n,mu,tau,spf,prime\n");
    let mut rows = Vec::new();
    match &cached {
        Some(b) => sieve_rows(b, &mut csv, &mut rows),
        None => {
            let parts = map_blocks(a.lo, a.hi, DEFAULT_BLOCK_CAPACITY, |b| {
                let (mut c, mut r) = (String::new(), Vec::new());
                sieve_rows(b, &mut c, &mut r);
                (c, r)
            })?;
            for (c, r) in parts {
                csv.push_str(&c);
                rows.extend(r);
            }
        }
    }
    Ok(Output {
        csv,
        json: Value::Array(rows),
        failed: false,
    })
}

fn builtin_params(p: &BuiltinArgs) -> BuiltinParams {
    BuiltinParams {
        n: p.n,
        x: p.x,
        a_len: p.a_len,
        shift_a: p.shift_a,
        shift_b: p.shift_b,
        nu: p.nu,
        alpha: p.alpha.clone(),
        beta: p.beta.clone(),
        modulus: p.modulus,
        h: p.h,
    }
}

fn reports_output(run: &Run, reports: &[SumReport]) -> Result<Output> {
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, reports, run.timings)?;
    let mut json = to_json(&reports)?;
    if !run.timings {
        for r in json.as_array_mut().into_iter().flatten() {
            if let Some(o) = r.as_object_mut() {
                o.remove("elapsed");
            }
        }
    }
    Ok(Output {
        csv: utf8(buf)?,
        json,
        failed: false,
    })
}

pub fn sum(run: &Run, a: &SumArgs) -> Result<Output> {
    let mut dc = if let Some(name) = &a.builtin {
        builtin_collection(name, &builtin_params(&a.params))?
    } else if let Some(path) = &a.collection {
        CollectionConfig::load(path)?
    } else if let Some(max) = a.random {
        random_collection(run.seed, max)
    } else {
        return Err(config_error("sum needs --builtin, --collection or --random"));
    };
    if let Some(m) = a.m {
        dc = dc.with_target(m);
    }
    let engine = Engine::new(engine_config(run));
    if a.m_lo.is_some() && a.strategy != StrategyArg::Scan {
        return Err(config_error("--m-lo and --m-hi need --strategy scan"));
    }
    if a.split_d.is_some() && !matches!(a.strategy, StrategyArg::Decomp | StrategyArg::All) {
        return Err(config_error("--split-d applies to the decomposition strategy"));
    }
    let decomp = || -> Result<SumReport> { Ok(engine.eval_decomposition(&dc, a.split_d)?.0) };
    let reports = match a.strategy {
        StrategyArg::Direct => vec![engine.eval(&dc, Strategy::Direct)?],
        StrategyArg::Indexed => vec![engine.eval(&dc, Strategy::Indexed)?],
        StrategyArg::Decomp => vec![decomp()?],
        StrategyArg::Scan => match (a.m_lo, a.m_hi) {
            (Some(lo), Some(hi)) => engine.scan_m(&dc, lo, hi)?,
            _ => vec![engine.eval(&dc, Strategy::Scan)?],
        },
        StrategyArg::All => {
            let r = vec![
                engine.eval(&dc, Strategy::Direct)?,
                engine.eval(&dc, Strategy::Indexed)?,
                decomp()?,
            ];
            if let Some(bad) = r.iter().find(|x| !x.value.agrees(&r[0].value, 1e-9)) {
                return Err(mtl_core::Error::Internal(format!(
                    "strategies disagree: direct {} vs {} {}",
                    r[0].value, bad.strategy, bad.value
                ))
                .into());
            }
            r
        }
    };
    reports_output(run, &reports)
}

fn guard() -> EvalGuardConfig {
    EvalGuardConfig::default()
}

fn scans(ns: &[u64], grid: usize, refine: u32, direct: bool) -> Result<Vec<SupScanResult>> {
    ns.iter()
        .map(|&n| {
            Ok(if direct {
                sup_scan_direct(n, grid, refine)?
            } else {
                sup_scan(n, grid, refine)?
            })
        })
        .collect()
}

fn read_points(path: &std::path::Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let mut pts = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| config_error(format!("{}: bad row {:?}", path.display(), rec)))
        };
        pts.push((field(0)?, field(1)?));
    }
    Ok(pts)
}

pub fn exp(_run: &Run, cmd: &ExpCmd) -> Result<Output> {
    let single = |r| -> Result<Output> {
        let rows = vec![r];
        let mut buf = Vec::new();
        write_expsum_csv(&mut buf, &rows)?;
        Ok(Output {
            csv: utf8(buf)?,
            json: to_json(&rows)?,
            failed: false,
        })
    };
    match cmd {
        ExpCmd::Linear { n, alpha, d, a } => single(mu_exp_sum(*n, *alpha, *d, *a)?),
        ExpCmd::Bracket { n, poly, d, a } => {
            let p = BracketExpr::parse(poly)?;
            single(mu_bracket_exp_sum(*n, &p, *d, *a, &guard())?)
        }
        ExpCmd::Short { n, h, poly } => {
            let p = BracketExpr::parse(poly)?;
            single(mu_short_interval_sum(*n, *h, &p, &guard())?)
        }
        ExpCmd::Scan {
            n,
            grid,
            refine,
            direct,
        } => {
            let rows = scans(n, *grid, *refine, *direct)?;
            let mut csv = format!("{SCAN_CSV_HEADER}\n");
            for r in &rows {
                let _ = writeln!(csv, "{}", r.csv_row());
            }
            Ok(Output {
                csv,
                json: to_json(&rows)?,
                failed: false,
            })
        }
        ExpCmd::Fit {
            input,
            n,
            model,
            grid,
            refine,
        } => {
            let points = match input {
                Some(path) => read_points(path)?,
                None if n.is_empty() => return Err(config_error("fit needs --input or --n")),
                None => scans(n, *grid, *refine, false)?
                    .iter()
                    .map(|s| (s.n_limit as f64, s.sup_lower_bound))
                    .collect(),
            };
            let model = match model {
                ModelArg::LogPower => DecayModel::LogPower,
                ModelArg::Power => DecayModel::Power,
            };
            let fit = fit_decay(&points, model)?;
            let name = match fit.model {
                DecayModel::LogPower => "log_power",
                DecayModel::Power => "power",
            };
            let csv = format!(
                "model,points,parameter,intercept,residual\n{name},{},{:.16e},{:.16e},{:.16e}\n",
                points.len(),
                fit.parameter,
                fit.intercept,
                fit.residual
            );
            Ok(Output {
                csv,
                json: to_json(&[fit])?,
                failed: false,
            })
        }
    }
}

pub fn goldbach(run: &Run, cmd: &GoldbachCmd) -> Result<Output> {
    let mut buf = Vec::new();
    let json = match cmd {
        GoldbachCmd::R1 { m, x, method } => match (m, x) {
            (Some(m), _) => {
                let v = r1(*m)?;
                writeln!(buf, "{R1_CSV_HEADER}\n{m},{v:.16e}")?;
                json!([{"m": m, "R1": v}])
            }
            (None, Some(x)) => {
                let method = match method {
                    MethodArg::Auto => R1Method::Auto,
                    MethodArg::Direct => R1Method::Direct,
                    MethodArg::Fft => R1Method::Fft,
                };
                let values = r1_all_with(*x, method, run.budget_mem.unwrap_or(DEFAULT_FFT_BUDGET))?;
                write_r1_csv(&mut buf, &values, 2)?;
                let rows: Vec<Value> = values
                    .iter()
                    .enumerate()
                    .skip(2)
                    .map(|(m, v)| json!({"m": m, "R1": v}))
                    .collect();
                Value::Array(rows)
            }
            (None, None) => return Err(config_error("r1 needs --m or --x")),
        },
        GoldbachCmd::Series {
            m,
            tolerance,
            cutoff,
        } => {
            let rows = m
                .iter()
                .map(|&m| match cutoff {
                    Some(c) => singular_series_with_cutoff(m, *c),
                    None => singular_series(m, *tolerance),
                })
                .collect::<mtl_core::Result<Vec<_>>>()?;
            write_series_csv(&mut buf, &rows)?;
            to_json(&rows)?
        }
        GoldbachCmd::Compare { x, weight, cutoff } => {
            let weight = match weight {
                WeightArg::Mobius => CompareWeight::Mobius,
                WeightArg::AbsMobius => CompareWeight::AbsMobius,
                WeightArg::One => CompareWeight::One,
            };
            let rows = x
                .iter()
                .map(|&x| vaughan_compare_with(x, weight, *cutoff))
                .collect::<mtl_core::Result<Vec<_>>>()?;
            writeln!(buf, "{COMPARE_CSV_HEADER}")?;
            for r in &rows {
                writeln!(buf, "{}", r.csv_row())?;
            }
            to_json(&rows)?
        }
        GoldbachCmd::Exponents { sigma } => {
            let rows = sigma
                .iter()
                .map(|s| parse_rational(s).and_then(|q| exponent_value(&q)))
                .collect::<mtl_core::Result<Vec<_>>>()?;
            write_exponent_csv(&mut buf, &rows)?;
            Value::Array(
                rows.iter()
                    .map(|r| {
                        json!({"sigma": r.sigma.to_string(), "b": r.b.to_string(), "c": r.c.to_string()})
                    })
                    .collect(),
            )
        }
    };
    Ok(Output {
        csv: utf8(buf)?,
        json,
        failed: false,
    })
}

pub fn app(run: &Run, a: &AppArgs) -> Result<Output> {
    let strategy = match a.strategy {
        StrategyArg::Direct => Strategy::Direct,
        StrategyArg::Indexed => Strategy::Indexed,
        StrategyArg::Decomp => Strategy::Decomposition,
        StrategyArg::Scan => Strategy::Scan,
        StrategyArg::All => return Err(config_error("app runs a single strategy")),
    };
    let params = AppParams {
        x: a.x,
        a: a.a,
        b: a.b,
        a_len: a.a_len,
        nu: a.nu,
        alpha: a.alpha.clone(),
        beta: a.beta.clone(),
        m: a.m,
        n: a.n,
        h: a.h,
        bench: BenchmarkParams {
            log_power: a.log_power,
            exp_constant: a.exp_constant,
            sigma: parse_rational(&a.sigma)?,
        },
    };
    let opts = AppOptions {
        strategy,
        engine: engine_config(run),
    };
    let rows = vec![run_app(&a.name, &params, &opts)?];
    let mut buf = Vec::new();
    write_app_csv(&mut buf, &rows)?;
    let mut json = to_json(&rows)?;
    if !run.timings {
        for r in json.as_array_mut().into_iter().flatten() {
            if let Some(rep) = r.get_mut("report").and_then(Value::as_object_mut) {
                rep.remove("elapsed");
            }
        }
    }
    Ok(Output {
        csv: utf8(buf)?,
        json,
        failed: false,
    })
}

pub fn selftest(run: &Run, a: &SelftestArgs) -> Result<Output> {
    let checks = run_selftest(SelftestOptions {
        quick: a.quick,
        seed: run.seed,
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    if run.timings {
        w.write_record(["check", "passed", "detail", "seconds"])?;
    } else {
        w.write_record(["check", "passed", "detail"])?;
    }
    for c in &checks {
        let passed = c.passed.to_string();
        if run.timings {
            w.write_record([c.name.as_str(), &passed, &c.detail, &format!("{:.3}", c.seconds)])?;
        } else {
            w.write_record([c.name.as_str(), &passed, &c.detail])?;
        }
        if !c.passed {
            eprintln!("selftest: {} FAILED: {}", c.name, c.detail);
        }
    }
    let csv = utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    Ok(Output {
        csv,
        json: to_json(&checks)?,
        failed: checks.iter().any(|c| !c.passed),
    })
}
