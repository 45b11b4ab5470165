//! Evaluation of the Mobius-weighted ternary sum `S(D; M)`.
//!
//! Four strategies share one materialized collection:
//!
//! * `direct` runs the literal triple loop;
//! * `indexed` looks up `wp`-buckets for every pair `(n1, n2)`;
//! * `decomposition` computes `I(d)` for every `d` and returns
//!   `sum_d mu(d) I(d)`, detecting coprimality by inclusion-exclusion;
//! * `scan` produces the indexed value for every `M` of a range at once.
//!
//! Integral weights are summed exactly in `i128`. Complex weights are summed
//! per shard with compensation and the shards are combined by
//! [`tree_reduce`](crate::accum::tree_reduce), so results do not depend on the
//! number of worker threads.

mod decomp;
mod direct;
mod indexed;
mod scan;

pub use decomp::DecompositionTrace;

use crate::arith::gcd;
use crate::collection::{DataCollection, Materialized, SideTerm};
use crate::error::{arg, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::ops::Add;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Direct,
    Indexed,
    Decomposition,
    Scan,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::Indexed => "indexed",
            Strategy::Decomposition => "decomposition",
            Strategy::Scan => "scan",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value of a sum: exact when every weight is an integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SumValue {
    Exact(i128),
    Approx(Complex64),
}

impl SumValue {
    pub fn to_complex(&self) -> Complex64 {
        match *self {
            SumValue::Exact(v) => Complex64::new(v as f64, 0.0),
            SumValue::Approx(z) => z,
        }
    }

    pub fn abs(&self) -> f64 {
        match *self {
            SumValue::Exact(v) => v.unsigned_abs() as f64,
            SumValue::Approx(z) => z.norm(),
        }
    }

    pub fn as_exact(&self) -> Option<i128> {
        match *self {
            SumValue::Exact(v) => Some(v),
            SumValue::Approx(_) => None,
        }
    }

    /// Real and imaginary parts as text: integers verbatim, otherwise
    /// 17 significant digits.
    pub fn render(&self) -> (String, String) {
        match *self {
            SumValue::Exact(v) => (v.to_string(), "0".into()),
            SumValue::Approx(z) => (format!("{:.16e}", z.re), format!("{:.16e}", z.im)),
        }
    }

    /// Equality: exact for integers, relative `tol` otherwise.
    pub fn agrees(&self, other: &SumValue, tol: f64) -> bool {
        match (self, other) {
            (SumValue::Exact(a), SumValue::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_complex(), other.to_complex());
                (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
            }
        }
    }
}

impl fmt::Display for SumValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SumValue::Exact(v) => write!(f, "{v}"),
            SumValue::Approx(z) => write!(f, "{:.16e}{:+.16e}i", z.re, z.im),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SumReport {
    pub strategy: Strategy,
    pub target_m: i64,
    pub value: SumValue,
    pub trivial_bound: u128,
    /// `|value| / trivial_bound`, zero for an empty collection.
    pub savings_ratio: f64,
    pub terms_visited: u64,
    #[serde(with = "secs")]
    pub elapsed: Duration,
}

mod secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }
}

pub const REPORT_CSV_HEADER: &str =
    "strategy,M,value_re,value_im,trivial_bound,savings_ratio,terms,seconds";

impl SumReport {
    fn new(
        strategy: Strategy,
        mat: &Materialized,
        target_m: i64,
        value: SumValue,
        terms_visited: u64,
        elapsed: Duration,
    ) -> Self {
        let savings_ratio = if mat.trivial_bound == 0 {
            0.0
        } else {
            value.abs() / mat.trivial_bound as f64
        };
        Self {
            strategy,
            target_m,
            value,
            trivial_bound: mat.trivial_bound,
            savings_ratio,
            terms_visited,
            elapsed,
        }
    }

    /// One CSV row; the timing column is left empty unless `timings` is set
    /// so that repeated runs produce identical files.
    pub fn csv_row(&self, timings: bool) -> String {
        let (re, im) = self.value.render();
        let secs = if timings {
            format!("{:.6}", self.elapsed.as_secs_f64())
        } else {
            String::new()
        };
        format!(
            "{},{},{},{},{},{:.16e},{},{}",
            self.strategy,
            self.target_m,
            re,
            im,
            self.trivial_bound,
            self.savings_ratio,
            self.terms_visited,
            secs
        )
    }
}

pub fn write_reports_csv<W: Write>(mut w: W, reports: &[SumReport], timings: bool) -> Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row(timings))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Largest `|A| * |B| * |N3|` the direct and decomposition strategies accept.
    pub direct_cap: u128,
    /// Largest number of weighted pairs the indexed strategy visits.
    pub pair_cap: u128,
    /// Memory allowed for indexes; larger indexes are processed in windows.
    pub memory_budget: u64,
    /// Side terms per shard.
    pub shard_size: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            direct_cap: 1_000_000_000,
            pair_cap: 1u128 << 40,
            memory_budget: 1 << 30,
            shard_size: 64,
        }
    }
}

/// `mu(n1 n2 n3)` from the factors' Mobius values and pairwise gcds, without
/// forming the product.
pub fn mu_of_triple(n: [u64; 3], mu: [i8; 3]) -> i8 {
    if mu.contains(&0) {
        return 0;
    }
    if gcd(n[0], n[1]) != 1 || gcd(n[0], n[2]) != 1 || gcd(n[1], n[2]) != 1 {
        return 0;
    }
    mu[0] * mu[1] * mu[2]
}

/// Shard partial; combined with `+` in a fixed tree.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Partial {
    pub exact: i128,
    pub approx: Complex64,
    pub visited: u64,
}

impl Add for Partial {
    type Output = Partial;
    fn add(self, o: Partial) -> Partial {
        Partial {
            exact: self.exact + o.exact,
            approx: self.approx + o.approx,
            visited: self.visited + o.visited,
        }
    }
}

impl Partial {
    fn value(&self, integral: bool) -> SumValue {
        if integral {
            SumValue::Exact(self.exact)
        } else {
            SumValue::Approx(self.approx)
        }
    }
}

/// `u[n1] v[n2] * mu` in the representation the run uses.
#[inline]
pub(crate) fn weight_product(a: &SideTerm, b: &SideTerm) -> (i64, Complex64) {
    (a.int_weight * b.int_weight, a.weight * b.weight)
}

pub struct Engine {
    pub config: EngineConfig,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(EngineConfig::default())
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Self { config }
    }

    fn check_direct_cap(&self, mat: &Materialized) -> Result<()> {
        if mat.triple_count > self.config.direct_cap {
            return Err(Error::Resource(format!(
                "{} triples exceed the direct cap {}; use the indexed strategy",
                mat.triple_count, self.config.direct_cap
            )));
        }
        Ok(())
    }

    pub fn eval_direct(&self, dc: &DataCollection) -> Result<SumReport> {
        let t0 = Instant::now();
        let mat = dc.materialize()?;
        self.check_direct_cap(&mat)?;
        let p = direct::run(&mat, self.config.shard_size);
        Ok(SumReport::new(
            Strategy::Direct,
            &mat,
            mat.target_m,
            p.value(mat.integral),
            p.visited,
            t0.elapsed(),
        ))
    }

    pub fn eval_indexed(&self, dc: &DataCollection) -> Result<SumReport> {
        let t0 = Instant::now();
        let mat = dc.materialize()?;
        let p = indexed::run(&mat, &self.config)?;
        Ok(SumReport::new(
            Strategy::Indexed,
            &mat,
            mat.target_m,
            p.value(mat.integral),
            p.visited,
            t0.elapsed(),
        ))
    }

    /// `split_d = None` uses `round((ln max N3)^4)` clamped to `[2, max N3]`.
    pub fn eval_decomposition(
        &self,
        dc: &DataCollection,
        split_d: Option<u64>,
    ) -> Result<(SumReport, DecompositionTrace)> {
        let t0 = Instant::now();
        let mat = dc.materialize()?;
        self.check_direct_cap(&mat)?;
        let top = mat.interval_n3.hi();
        let split = match split_d {
            Some(d) => {
                if d < 2 || d > top {
                    return arg(format!("split_D must lie in [2, {top}]"));
                }
                d
            }
            None => default_split(top),
        };
        let (p, trace) = decomp::run(&mat, split);
        Ok((
            SumReport::new(
                Strategy::Decomposition,
                &mat,
                mat.target_m,
                p.value(mat.integral),
                p.visited,
                t0.elapsed(),
            ),
            trace,
        ))
    }

    /// Runs one strategy; `Scan` evaluates the single entry at the target.
    pub fn eval(&self, dc: &DataCollection, strategy: Strategy) -> Result<SumReport> {
        match strategy {
            Strategy::Direct => self.eval_direct(dc),
            Strategy::Indexed => self.eval_indexed(dc),
            Strategy::Decomposition => Ok(self.eval_decomposition(dc, None)?.0),
            Strategy::Scan => {
                let m = dc.target_m;
                Ok(self.scan_m(dc, m, m)?.remove(0))
            }
        }
    }

    /// `I(d)` for one `d`; zero whenever `d > max N3`.
    pub fn i_of_d(&self, dc: &DataCollection, d: u64) -> Result<SumValue> {
        if d == 0 {
            return arg("d must be at least 1");
        }
        let mat = dc.materialize()?;
        self.check_direct_cap(&mat)?;
        Ok(decomp::single(&mat, d))
    }

    pub fn scan_m(&self, dc: &DataCollection, lo: i64, hi: i64) -> Result<Vec<SumReport>> {
        if hi < lo {
            return arg("scan range has hi < lo");
        }
        let len = (hi as i128 - lo as i128 + 1) as u128;
        if len > 10_000_000 {
            return arg("scan range longer than 10^7");
        }
        let t0 = Instant::now();
        let mat = dc.materialize()?;
        let parts = scan::run(&mat, lo, hi, &self.config)?;
        let elapsed = t0.elapsed();
        Ok(parts
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                SumReport::new(
                    Strategy::Scan,
                    &mat,
                    lo + i as i64,
                    p.value(mat.integral),
                    p.visited,
                    elapsed,
                )
            })
            .collect())
    }
}

fn default_split(top: u64) -> u64 {
    if top < 2 {
        return top.max(1);
    }
    let d = (top as f64).ln().powi(4).round() as u64;
    d.clamp(2, top)
}

pub fn eval_direct(dc: &DataCollection) -> Result<SumReport> {
    Engine::default().eval_direct(dc)
}

pub fn eval_indexed(dc: &DataCollection) -> Result<SumReport> {
    Engine::default().eval_indexed(dc)
}

pub fn eval_decomposition(
    dc: &DataCollection,
    split_d: Option<u64>,
) -> Result<(SumReport, DecompositionTrace)> {
    Engine::default().eval_decomposition(dc, split_d)
}

pub fn scan_m(dc: &DataCollection, lo: i64, hi: i64) -> Result<Vec<SumReport>> {
    Engine::default().scan_m(dc, lo, hi)
}

#[cfg(test)]
mod tests;
