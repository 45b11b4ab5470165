//! The application sums, each a builtin collection run through the engine.
//!
//! `normalized` divides `|value|` by a count of the triples that can occur,
//! so it always lies in `[0, 1]`: `x^2` for the prime and squarefree sums,
//! `x^2 ceil(1/alpha)` for Beatty, `2 m^2` for quadratic residues and `N H`
//! for the short-variable sum.

use crate::bracket::{eval_bracket, BracketExpr, EvalGuardConfig};
use crate::collection::{Builtin, DataCollection};
use crate::engine::{Engine, EngineConfig, Strategy, SumReport, SumValue};
use crate::error::{arg, Error, Result};
use crate::goldbach::exponent_c;
use crate::sieve::{primes_up_to, sieve_block};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

pub const APP_NAMES: [&str; 7] = [
    "primes_sum",
    "primes_indexed",
    "squarefree",
    "beatty",
    "quadratic",
    "small_var",
    "prime_pair_mobius",
];

#[derive(Debug, Clone, Copy)]
pub struct AppOptions {
    pub strategy: Strategy,
    pub engine: EngineConfig,
}

impl Default for AppOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Indexed,
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Benchmark {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AppResult {
    pub app_name: String,
    pub params: BTreeMap<String, String>,
    pub report: SumReport,
    pub normalized: f64,
    /// Reference curves evaluated at the same parameters, if any.
    pub benchmarks: Vec<Benchmark>,
}

pub const APP_CSV_HEADER: &str =
    "app,params,strategy,M,value_re,value_im,trivial_bound,normalized,terms";

impl AppResult {
    pub fn csv_row(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let (re, im) = self.report.value.render();
        format!(
            "{},{},{},{},{},{},{},{:.16e},{}",
            self.app_name,
            params.join(";"),
            self.report.strategy,
            self.report.target_m,
            re,
            im,
            self.report.trivial_bound,
            self.normalized,
            self.report.terms_visited
        )
    }

    pub fn exact_value(&self) -> Option<i128> {
        self.report.value.as_exact()
    }
}

pub fn write_app_csv<W: Write>(mut w: W, rows: &[AppResult]) -> Result<()> {
    writeln!(w, "{APP_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn finish(
    name: &str,
    params: BTreeMap<String, String>,
    report: SumReport,
    norm: f64,
) -> AppResult {
    let normalized = if norm > 0.0 { report.value.abs() / norm } else { 0.0 };
    AppResult {
        app_name: name.to_string(),
        params,
        report,
        normalized,
        benchmarks: Vec::new(),
    }
}

fn run(dc: &DataCollection, opts: &AppOptions) -> Result<SumReport> {
    Engine::new(opts.engine).eval(dc, opts.strategy)
}

fn sq(x: u64) -> f64 {
    x as f64 * x as f64
}

/// `sum mu((p-a)(q-b)(p+q))` over primes `a < p <= A`, `b < q <= A` with
/// `p + q <= x`. `a_len` defaults to `x`.
pub fn app_primes_sum(
    x: u64,
    a: i64,
    b: i64,
    a_len: Option<u64>,
    opts: &AppOptions,
) -> Result<AppResult> {
    let a_len = a_len.unwrap_or(x);
    let dc = Builtin::PrimesI {
        x,
        a_len,
        shift_a: a,
        shift_b: b,
    }
    .collection()?;
    let report = run(&dc, opts)?;
    let p = params(&[
        ("x", x.to_string()),
        ("a", a.to_string()),
        ("b", b.to_string()),
        ("A", a_len.to_string()),
    ]);
    Ok(finish("primes_sum", p, report, sq(x)))
}

/// `sum mu^2(k l) mu(p_k + p_l)` over `p_k, p_l <= x` with
/// `gcd(k l, p_k + p_l) = 1`.
pub fn app_primes_indexed(x: u64, opts: &AppOptions) -> Result<AppResult> {
    let dc = Builtin::PrimesII { x }.collection()?;
    let report = run(&dc, opts)?;
    Ok(finish("primes_indexed", params(&[("x", x.to_string())]), report, sq(x)))
}

/// `sum mu^nu(k l) mu(k + l)` over `k, l <= A`, `k + l <= x`.
pub fn app_squarefree(x: u64, nu: u8, a_len: Option<u64>, opts: &AppOptions) -> Result<AppResult> {
    let a_len = a_len.unwrap_or(x);
    let dc = Builtin::Squarefree { x, nu, a_len }.collection()?;
    let report = run(&dc, opts)?;
    let p = params(&[
        ("x", x.to_string()),
        ("nu", nu.to_string()),
        ("A", a_len.to_string()),
    ]);
    Ok(finish("squarefree", p, report, sq(x)))
}

/// `sum mu(k l n)` over `k, l <= x`, `n >= 1` with `k + l = floor(alpha n + beta)`.
/// `alpha` and `beta` are constant expressions such as `sqrt(2)`.
pub fn app_beatty(x: u64, alpha: &str, beta: &str, opts: &AppOptions) -> Result<AppResult> {
    let dc = Builtin::Beatty {
        x,
        alpha: alpha.to_string(),
        beta: beta.to_string(),
    }
    .collection()?;
    let report = run(&dc, opts)?;
    let alpha_value = eval_bracket(&BracketExpr::parse(alpha)?, 0, &EvalGuardConfig::default())?.to_f64();
    // each value k + l is hit by at most ceil(1/alpha) values of n
    let per_value = (1.0 / alpha_value).ceil().max(1.0);
    let p = params(&[
        ("x", x.to_string()),
        ("alpha", alpha.to_string()),
        ("beta", beta.to_string()),
    ]);
    Ok(finish("beatty", p, report, sq(x) * per_value))
}

/// `sum mu(a b c)` over `a, b <= m`, `c <= 2m` with `a + b = c^2 (mod m)`,
/// as the engine sums at `M = 0` and `M = m` added together.
///
/// The congruence also allows `a + b = (c^2 mod m) + 2m`, which forces
/// `a = b = m` and contributes `mu(m^2 c) = 0`.
pub fn app_quadratic(m: u64, opts: &AppOptions) -> Result<AppResult> {
    let dc = Builtin::QuadraticResidue { m }.collection()?;
    let engine = Engine::new(opts.engine);
    let r0 = engine.eval(&dc, opts.strategy)?;
    let m_i64 = i64::try_from(m).map_err(|_| Error::Argument("m exceeds 2^63 - 1".into()))?;
    let r1 = engine.eval(&dc.with_target(m_i64), opts.strategy)?;
    let value = match (r0.value, r1.value) {
        (SumValue::Exact(a), SumValue::Exact(b)) => SumValue::Exact(a + b),
        (a, b) => SumValue::Approx(a.to_complex() + b.to_complex()),
    };
    let trivial_bound = r0.trivial_bound + r1.trivial_bound;
    let report = SumReport {
        strategy: r0.strategy,
        target_m: 0,
        value,
        trivial_bound,
        savings_ratio: if trivial_bound == 0 {
            0.0
        } else {
            value.abs() / trivial_bound as f64
        },
        terms_visited: r0.terms_visited + r1.terms_visited,
        elapsed: r0.elapsed + r1.elapsed,
    };
    Ok(finish("quadratic", params(&[("m", m.to_string())]), report, 2.0 * sq(m)))
}

/// Constants for the reference curves reported next to [`app_small_var`].
#[derive(Debug, Clone)]
pub struct BenchmarkParams {
    /// Exponent in `N H (log H)^(-C)`.
    pub log_power: f64,
    /// Constant in `N H exp(-c sqrt(log H))`.
    pub exp_constant: f64,
    /// Zero-free abscissa for `N H^(c(sigma))`.
    pub sigma: BigRational,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        Self {
            log_power: 1.0,
            exp_constant: 1.0,
            sigma: BigRational::new(1.into(), 2.into()),
        }
    }
}

/// `sum mu(n1 n2 n3)` over `n1 + n2 + n3 = N` with `n3 <= H`.
pub fn app_small_var(n: u64, h: u64, bench: &BenchmarkParams, opts: &AppOptions) -> Result<AppResult> {
    let dc = Builtin::SmallVar { n, h }.collection()?;
    let report = run(&dc, opts)?;
    let nh = n as f64 * h as f64;
    let log_h = (h as f64).ln();
    let c_sigma = exponent_c(&bench.sigma)?
        .to_f64()
        .ok_or_else(|| Error::Internal("c(sigma) not representable".into()))?;
    let p = params(&[
        ("N", n.to_string()),
        ("H", h.to_string()),
        ("C", bench.log_power.to_string()),
        ("c", bench.exp_constant.to_string()),
        ("sigma", bench.sigma.to_string()),
    ]);
    let mut out = finish("small_var", p, report, nh);
    out.benchmarks = vec![
        Benchmark {
            name: "log_power".into(),
            value: nh * log_h.powf(-bench.log_power),
        },
        Benchmark {
            name: "exp_sqrt_log".into(),
            value: nh * (-bench.exp_constant * log_h.sqrt()).exp(),
        },
        Benchmark {
            name: "power".into(),
            value: n as f64 * (h as f64).powf(c_sigma),
        },
    ];
    Ok(out)
}

/// `sum_{p + q <= x} mu(p + q)` over ordered prime pairs, summed directly.
pub fn prime_pair_mobius_sum(x: u64) -> Result<i64> {
    if x < 2 {
        return arg("x must be at least 2");
    }
    let primes = primes_up_to(x);
    let block = sieve_block(1, x)?;
    // count ordered pairs per sum, then weight
    let mut count = vec![0u64; x as usize + 1];
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[..=i] {
            if p + q > x {
                break;
            }
            count[(p + q) as usize] += if p == q { 1 } else { 2 };
        }
    }
    Ok(count
        .iter()
        .enumerate()
        .skip(2)
        .map(|(m, &c)| block.mu(m as u64) as i64 * c as i64)
        .sum())
}

/// [`prime_pair_mobius_sum`] packaged as an [`AppResult`].
pub fn app_prime_pair_mobius(x: u64) -> Result<AppResult> {
    let t0 = std::time::Instant::now();
    let v = prime_pair_mobius_sum(x)?;
    let pairs = {
        let primes = primes_up_to(x);
        let mut n = 0u128;
        for &p in &primes {
            n += primes.iter().take_while(|&&q| p + q <= x).count() as u128;
        }
        n
    };
    let report = SumReport {
        strategy: Strategy::Direct,
        target_m: 0,
        value: SumValue::Exact(v as i128),
        trivial_bound: pairs,
        savings_ratio: if pairs == 0 { 0.0 } else { v.unsigned_abs() as f64 / pairs as f64 },
        terms_visited: pairs as u64,
        elapsed: t0.elapsed(),
    };
    Ok(finish("prime_pair_mobius", params(&[("x", x.to_string())]), report, sq(x)))
}

/// Loose parameters for running an app by name.
#[derive(Debug, Clone, Default)]
pub struct AppParams {
    pub x: Option<u64>,
    pub a: Option<i64>,
    pub b: Option<i64>,
    pub a_len: Option<u64>,
    pub nu: Option<u8>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub m: Option<u64>,
    pub n: Option<u64>,
    pub h: Option<u64>,
    pub bench: BenchmarkParams,
}

fn need<T: Clone>(v: &Option<T>, name: &str, app: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Argument(format!("app `{app}` needs parameter `{name}`")))
}

pub fn run_app(name: &str, p: &AppParams, opts: &AppOptions) -> Result<AppResult> {
    match name {
        "primes_sum" => app_primes_sum(
            need(&p.x, "x", name)?,
            p.a.unwrap_or(0),
            p.b.unwrap_or(0),
            p.a_len,
            opts,
        ),
        "primes_indexed" => app_primes_indexed(need(&p.x, "x", name)?, opts),
        "squarefree" => app_squarefree(
            need(&p.x, "x", name)?,
            need(&p.nu, "nu", name)?,
            p.a_len,
            opts,
        ),
        "beatty" => app_beatty(
            need(&p.x, "x", name)?,
            &need(&p.alpha, "alpha", name)?,
            p.beta.as_deref().unwrap_or("0"),
            opts,
        ),
        "quadratic" => app_quadratic(need(&p.m, "m", name)?, opts),
        "small_var" => app_small_var(need(&p.n, "n", name)?, need(&p.h, "h", name)?, &p.bench, opts),
        "prime_pair_mobius" => app_prime_pair_mobius(need(&p.x, "x", name)?),
        other => arg(format!(
            "unknown app `{other}`; expected one of {}",
            APP_NAMES.join(", ")
        )),
    }
}

#[cfg(test)]
mod tests;
