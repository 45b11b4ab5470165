//! Mobius-weighted exponential sums `sum mu(n) e(phase(n))`, with
//! `e(t) = exp(2 pi i t)`.
//!
//! Phases are reduced modulo 1 before the multiplication by `2 pi`. For a
//! linear phase `alpha * n` with `alpha` a double, the reduction is exact:
//! `alpha = m * 2^k` and `m * n` is formed in 128 bits.

mod fit;
mod scan;

pub use fit::{fit_decay, DecayFit, DecayModel};
pub use scan::{
    grid_max_both, sup_scan, sup_scan_direct, SupScanResult, DEFAULT_GRID, DEFAULT_REFINE,
    SCAN_CSV_HEADER,
};

use crate::accum::{tree_reduce, CompensatedComplex, Pairwise};
use crate::bracket::{BracketExpr, EvalGuardConfig, Evaluator};
use crate::error::{arg, Error, Result};
use crate::sieve::{map_blocks, SieveBlock, DEFAULT_BLOCK_CAPACITY};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use std::io::Write;

/// Blocks used when every term needs a bracket evaluation.
const BRACKET_BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Alpha(f64),
    Poly(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpSumResult {
    /// Summation range `lo..=hi`.
    pub lo: u64,
    pub hi: u64,
    /// Interval length for short sums.
    pub h: Option<u64>,
    pub phase: Phase,
    pub d: u64,
    pub a: u64,
    pub value: Complex64,
    pub abs_value: f64,
    /// Number of `n` summed over, the trivial bound.
    pub count: u64,
    /// `H / N^(5/8)` for short sums.
    pub short_ratio: Option<f64>,
}

pub const EXPSUM_CSV_HEADER: &str = "N,H,d,a,alpha_or_poly,value_re,value_im,abs";

impl ExpSumResult {
    pub fn csv_row(&self) -> String {
        let (n, h) = match self.h {
            Some(h) => (self.lo - 1, h.to_string()),
            None => (self.hi, String::new()),
        };
        let phase = match &self.phase {
            Phase::Alpha(a) => format!("{a:.17e}"),
            Phase::Poly(p) => format!("\"{}\"", p.replace('"', "\"\"")),
        };
        format!(
            "{n},{h},{},{},{phase},{:.16e},{:.16e},{:.16e}",
            self.d, self.a, self.value.re, self.value.im, self.abs_value
        )
    }
}

pub fn write_expsum_csv<W: Write>(mut w: W, rows: &[ExpSumResult]) -> Result<()> {
    writeln!(w, "{EXPSUM_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// `frac(alpha * n)` computed exactly from the binary expansion of `alpha`,
/// rounded once to a double in `[0, 1)`.
pub fn frac_mul(alpha: f64, n: u64) -> f64 {
    if alpha == 0.0 || n == 0 || !alpha.is_finite() {
        return 0.0;
    }
    let bits = alpha.abs().to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    let (m, e) = if biased == 0 {
        (mantissa, -1074)
    } else {
        (mantissa | (1u64 << 52), biased - 1075)
    };
    if e >= 0 {
        return 0.0;
    }
    let prod = m as u128 * n as u128;
    let sh = (-e) as u32;
    let rem = if sh >= 128 { prod } else { prod & ((1u128 << sh) - 1) };
    let t = scale(rem as f64, e);
    let t = if alpha < 0.0 && t != 0.0 { 1.0 - t } else { t };
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

fn scale(x: f64, e: i32) -> f64 {
    let h = e / 2;
    x * 2f64.powi(h) * 2f64.powi(e - h)
}

/// `e(t)` for `t` already reduced to `[0, 1)`.
#[inline]
pub fn unit(t: f64) -> Complex64 {
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

fn check_progression(d: u64, a: u64) -> Result<()> {
    if d == 0 {
        return arg("modulus d must be at least 1");
    }
    if a >= d {
        return arg("residue a must satisfy 0 <= a < d");
    }
    Ok(())
}

/// Count of `n` in `[lo, hi]` with `n = a (mod d)`.
fn progression_count(lo: u64, hi: u64, d: u64, a: u64) -> u64 {
    if hi < lo {
        return 0;
    }
    let upto = |x: u64| -> u64 {
        // n in [0, x] with n = a (mod d)
        if x < a {
            0
        } else {
            (x - a) / d + 1
        }
    };
    upto(hi) - if lo == 0 { 0 } else { upto(lo - 1) }
}

/// First `n >= lo` with `n = a (mod d)`.
fn first_in_progression(lo: u64, d: u64, a: u64) -> u64 {
    let r = lo % d;
    if r <= a {
        lo + (a - r)
    } else {
        lo + (d - r) + a
    }
}

fn block_terms<F>(block: &SieveBlock, d: u64, a: u64, mut f: F) -> Result<()>
where
    F: FnMut(u64, i8) -> Result<()>,
{
    let mut n = first_in_progression(block.lo(), d, a);
    while n <= block.hi() {
        let mu = block.mu(n);
        if mu != 0 {
            f(n, mu)?;
        }
        n = match n.checked_add(d) {
            Some(v) => v,
            None => break,
        };
    }
    Ok(())
}

fn linear_range(lo: u64, hi: u64, alpha: f64, d: u64, a: u64) -> Result<Complex64> {
    if hi < lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let parts = map_blocks(lo, hi, DEFAULT_BLOCK_CAPACITY, |b| {
        let mut acc = CompensatedComplex::new();
        block_terms(b, d, a, |n, mu| {
            acc.add(unit(frac_mul(alpha, n)) * mu as f64);
            Ok(())
        })
        .unwrap();
        acc.value()
    })?;
    Ok(tree_reduce(parts, Complex64::new(0.0, 0.0)))
}

fn bracket_range(lo: u64, hi: u64, eval: &Evaluator, d: u64, a: u64) -> Result<Complex64> {
    if hi < lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let parts = map_blocks(lo, hi, BRACKET_BLOCK, |b| {
        let mut acc = CompensatedComplex::new();
        block_terms(b, d, a, |n, mu| {
            let t = eval.phase(to_i64(n)?)?;
            acc.add(unit(t) * mu as f64);
            Ok(())
        })
        .map(|_| acc.value())
    })?;
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(tree_reduce(parts, Complex64::new(0.0, 0.0)))
}

fn to_i64(n: u64) -> Result<i64> {
    i64::try_from(n).map_err(|_| Error::Argument("n exceeds 2^63 - 1".into()))
}

fn result(lo: u64, hi: u64, h: Option<u64>, phase: Phase, d: u64, a: u64, value: Complex64) -> ExpSumResult {
    ExpSumResult {
        lo,
        hi,
        h,
        phase,
        d,
        a,
        value,
        abs_value: value.norm(),
        count: progression_count(lo, hi, d, a),
        short_ratio: None,
    }
}

/// `sum_{n <= N, n = a (mod d)} mu(n) e(alpha n)` with `alpha` in `[0, 1)`.
pub fn mu_exp_sum(n_limit: u64, alpha: f64, d: u64, a: u64) -> Result<ExpSumResult> {
    check_progression(d, a)?;
    if n_limit < 1 {
        return arg("N must be at least 1");
    }
    if !(0.0..1.0).contains(&alpha) {
        return arg("alpha must lie in [0, 1)");
    }
    let v = linear_range(1, n_limit, alpha, d, a)?;
    Ok(result(1, n_limit, None, Phase::Alpha(alpha), d, a, v))
}

/// `sum_{n <= N, n = a (mod d)} mu(n) e(p(n))`.
pub fn mu_bracket_exp_sum(
    n_limit: u64,
    p: &BracketExpr,
    d: u64,
    a: u64,
    guard: &EvalGuardConfig,
) -> Result<ExpSumResult> {
    check_progression(d, a)?;
    if n_limit < 1 {
        return arg("N must be at least 1");
    }
    let eval = Evaluator::new(p, *guard)?;
    let v = bracket_range(1, n_limit, &eval, d, a)?;
    Ok(result(1, n_limit, None, Phase::Poly(p.label().into()), d, a, v))
}

/// `sum_{N < n <= N + H} mu(n) e(p(n))` for an ordinary polynomial `p`.
pub fn mu_short_interval_sum(
    n_start: u64,
    h: u64,
    p: &BracketExpr,
    guard: &EvalGuardConfig,
) -> Result<ExpSumResult> {
    if h < 1 {
        return arg("H must be at least 1");
    }
    if p.has_brackets() {
        return arg(
            "short-interval sums take an ordinary polynomial; floor and frac are not allowed",
        );
    }
    let hi = n_start
        .checked_add(h)
        .filter(|&v| v <= i64::MAX as u64)
        .ok_or_else(|| Error::Argument("N + H exceeds 2^63 - 1".into()))?;
    let eval = Evaluator::new(p, *guard)?;
    let v = bracket_range(n_start + 1, hi, &eval, 1, 0)?;
    let mut r = result(n_start + 1, hi, Some(h), Phase::Poly(p.label().into()), 1, 0, v);
    r.short_ratio = Some(h as f64 / (n_start.max(1) as f64).powf(0.625));
    Ok(r)
}

/// Piecewise-linear function on `[0, 1]` with values in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Breakpoints `(t, y)` with `t` strictly increasing from 0 to 1.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return arg("psi needs at least two breakpoints");
        }
        if points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
            return arg("psi breakpoints must start at 0 and end at 1");
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return arg("psi breakpoints must be strictly increasing");
        }
        if let Some(p) = points.iter().find(|p| !(p.1 >= -1.0 && p.1 <= 1.0)) {
            return arg(format!("psi value {} at t = {} lies outside [-1, 1]", p.1, p.0));
        }
        Ok(Self { points })
    }

    pub fn constant(y: f64) -> Result<Self> {
        Self::new(vec![(0.0, y), (1.0, y)])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|p| p.0 <= t);
        if k == 0 {
            return self.points[0].1;
        }
        if k == self.points.len() {
            return self.points[k - 1].1;
        }
        let (t0, y0) = self.points[k - 1];
        let (t1, y1) = self.points[k];
        y0 + (y1 - y0) * (t - t0) / (t1 - t0)
    }

    pub fn lipschitz(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }
}

/// `sum_{n <= N} mu(n) psi(frac(p(n)))`.
pub fn mu_lipschitz_sum(
    n_limit: u64,
    p: &BracketExpr,
    psi: &PiecewiseLinear,
    guard: &EvalGuardConfig,
) -> Result<f64> {
    if n_limit < 1 {
        return arg("N must be at least 1");
    }
    let eval = Evaluator::new(p, *guard)?;
    let parts = map_blocks(1, n_limit, BRACKET_BLOCK, |b| {
        let mut acc = Pairwise::new();
        block_terms(b, 1, 0, |n, mu| {
            acc.add(mu as f64 * psi.eval(eval.phase(to_i64(n)?)?));
            Ok(())
        })
        .map(|_| acc.value())
    })?;
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(tree_reduce(parts, 0.0))
}

#[cfg(test)]
mod tests;
