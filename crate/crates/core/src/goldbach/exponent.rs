//! Exponents `b(sigma)` and `c(sigma)` as exact rationals, where `sigma` is a
//! zero-free abscissa for Dirichlet L-functions.

use crate::error::{arg, Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentValue {
    pub sigma: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

pub const EXPONENT_CSV_HEADER: &str = "sigma,b,c,sigma_decimal,b_decimal,c_decimal";

impl ExponentValue {
    pub fn csv_row(&self) -> String {
        let dec = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        format!(
            "{},{},{},{:.17e},{:.17e},{:.17e}",
            self.sigma,
            self.b,
            self.c,
            dec(&self.sigma),
            dec(&self.b),
            dec(&self.c)
        )
    }
}

pub fn write_exponent_csv<W: Write>(mut w: W, rows: &[ExponentValue]) -> Result<()> {
    writeln!(w, "{EXPONENT_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, an integer, or a plain decimal such as `0.55` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Argument(format!("not a rational number: `{s}`"));
    if s.contains('/') {
        let r: BigRational = s.parse().map_err(|_| bad())?;
        return Ok(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, scale);
    Ok(if neg { -r } else { r })
}

fn check(sigma: &BigRational) -> Result<()> {
    if *sigma < q(1, 2) || *sigma >= BigRational::one() {
        return arg(format!("sigma = {sigma} is outside [1/2, 1)"));
    }
    Ok(())
}

pub fn exponent_b(sigma: &BigRational) -> Result<BigRational> {
    check(sigma)?;
    let s = sigma.clone();
    Ok(if s <= q(4, 7) {
        (q(8, 1) * &s - q(7, 1) * &s * &s) / (q(4, 1) - q(2, 1) * &s)
    } else if s <= q(3, 5) {
        q(4, 5)
    } else {
        (s + q(1, 1)) / q(2, 1)
    })
}

pub fn exponent_c(sigma: &BigRational) -> Result<BigRational> {
    check(sigma)?;
    let s = sigma.clone();
    let c = if s <= q(4, 7) {
        (q(4, 1) + q(6, 1) * &s - q(7, 1) * &s * &s) / (q(8, 1) - q(4, 1) * &s)
    } else if s <= q(3, 5) {
        q(9, 10)
    } else {
        (s + q(3, 1)) / q(4, 1)
    };
    let half = (exponent_b(sigma)? + BigRational::one()) / q(2, 1);
    if !(c.clone() - half).is_zero() {
        return Err(Error::Internal(format!("c(sigma) != (b(sigma) + 1)/2 at sigma = {sigma}")));
    }
    Ok(c)
}

pub fn exponent_value(sigma: &BigRational) -> Result<ExponentValue> {
    Ok(ExponentValue {
        sigma: sigma.clone(),
        b: exponent_b(sigma)?,
        c: exponent_c(sigma)?,
    })
}
