//! Ready-made collections for the application sums.

use super::{DataCollection, Interval, MapSpec, WeightSpec};
use crate::bracket::{rem_bracket, BracketExpr, BracketValue, EvalGuardConfig};
use crate::error::{arg, Error, Result};
use crate::sieve::prime_pi;
use serde::{Deserialize, Serialize};

pub const BUILTIN_NAMES: [&str; 7] = [
    "plain_ternary",
    "primes_i",
    "primes_ii",
    "squarefree",
    "beatty",
    "quadratic_residue",
    "small_var",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Builtin {
    /// `n1 + n2 + n3 = N` over `[1, N]^3` with unit weights.
    PlainTernary { n: u64 },
    /// Primes `p, q <= a_len` (shifted by `shift_a`, `shift_b`) with `p + q <= x`.
    PrimesI {
        x: u64,
        a_len: u64,
        shift_a: i64,
        shift_b: i64,
    },
    /// Mobius weights on prime indices, `p_k + p_l <= 2x`.
    PrimesII { x: u64 },
    /// Weights `mu(n)^(nu+1)` on `[1, a_len]`, `k + l <= x`.
    Squarefree { x: u64, nu: u8, a_len: u64 },
    /// `k + l = floor(alpha*n + beta)`; `alpha`, `beta` are constant expressions.
    Beatty { x: u64, alpha: String, beta: String },
    /// `a + b = c^2 mod m` with target 0; use target `m` for the second half.
    QuadraticResidue { m: u64 },
    /// `n1 + n2 + n3 = N` with `n3 <= h`.
    SmallVar { n: u64, h: u64 },
}

/// Loose parameter bag used by the command line and config files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuiltinParams {
    pub n: Option<u64>,
    pub x: Option<u64>,
    pub a_len: Option<u64>,
    pub shift_a: Option<i64>,
    pub shift_b: Option<i64>,
    pub nu: Option<u8>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub modulus: Option<u64>,
    pub h: Option<u64>,
}

fn need<T: Copy>(v: Option<T>, name: &str, builtin: &str) -> Result<T> {
    v.ok_or_else(|| Error::Argument(format!("builtin `{builtin}` needs parameter `{name}`")))
}

pub fn builtin_collection(name: &str, p: &BuiltinParams) -> Result<DataCollection> {
    let b = match name {
        "plain_ternary" => Builtin::PlainTernary {
            n: need(p.n, "n", name)?,
        },
        "primes_i" => {
            let x = need(p.x, "x", name)?;
            Builtin::PrimesI {
                x,
                a_len: p.a_len.unwrap_or(x),
                shift_a: p.shift_a.unwrap_or(0),
                shift_b: p.shift_b.unwrap_or(0),
            }
        }
        "primes_ii" => Builtin::PrimesII {
            x: need(p.x, "x", name)?,
        },
        "squarefree" => {
            let x = need(p.x, "x", name)?;
            Builtin::Squarefree {
                x,
                nu: need(p.nu, "nu", name)?,
                a_len: p.a_len.unwrap_or(x),
            }
        }
        "beatty" => Builtin::Beatty {
            x: need(p.x, "x", name)?,
            alpha: p
                .alpha
                .clone()
                .ok_or_else(|| Error::Argument("builtin `beatty` needs parameter `alpha`".into()))?,
            beta: p.beta.clone().unwrap_or_else(|| "0".into()),
        },
        "quadratic_residue" => Builtin::QuadraticResidue {
            m: need(p.modulus, "modulus", name)?,
        },
        "small_var" => Builtin::SmallVar {
            n: need(p.n, "n", name)?,
            h: need(p.h, "h", name)?,
        },
        other => {
            return arg(format!(
                "unknown builtin `{other}`; expected one of {}",
                BUILTIN_NAMES.join(", ")
            ))
        }
    };
    b.collection()
}

fn ones_collection(a: Interval, n3: Interval, wp: BracketExpr, m: i64) -> DataCollection {
    DataCollection {
        interval_a: a,
        interval_b: a,
        interval_n3: n3,
        wp,
        u: WeightSpec::Ones,
        v: WeightSpec::Ones,
        f: MapSpec::Identity,
        g: MapSpec::Identity,
        target_m: m,
        guard: EvalGuardConfig::default(),
    }
}

fn expr(text: &str) -> BracketExpr {
    BracketExpr::parse(text)
        .expect("builtin expression parses")
        .declare_integer_valued()
}

fn constant_value(text: &str, what: &str) -> Result<f64> {
    let e = BracketExpr::parse(text)?;
    if !e.is_constant() {
        return arg(format!("{what} must not depend on n"));
    }
    Ok(crate::bracket::eval_bracket(&e, 0, &EvalGuardConfig::default())?.to_f64())
}

fn to_i64(v: u64) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Argument("parameter exceeds 2^63 - 1".into()))
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::PlainTernary { .. } => "plain_ternary",
            Builtin::PrimesI { .. } => "primes_i",
            Builtin::PrimesII { .. } => "primes_ii",
            Builtin::Squarefree { .. } => "squarefree",
            Builtin::Beatty { .. } => "beatty",
            Builtin::QuadraticResidue { .. } => "quadratic_residue",
            Builtin::SmallVar { .. } => "small_var",
        }
    }

    pub fn collection(&self) -> Result<DataCollection> {
        match self {
            Builtin::PlainTernary { n } => {
                if *n < 1 {
                    return arg("plain_ternary needs N >= 1");
                }
                let iv = Interval::up_to(*n);
                Ok(ones_collection(iv, iv, expr("n"), to_i64(*n)?))
            }
            Builtin::SmallVar { n, h } => {
                if *h < 1 || h > n {
                    return arg("small_var needs 1 <= H <= N");
                }
                Ok(ones_collection(
                    Interval::up_to(*n),
                    Interval::up_to(*h),
                    expr("n"),
                    to_i64(*n)?,
                ))
            }
            Builtin::PrimesI {
                x,
                a_len,
                shift_a,
                shift_b,
            } => {
                if *x < 10 {
                    return arg("primes_i needs x >= 10");
                }
                let max_shift = shift_a.unsigned_abs().max(shift_b.unsigned_abs());
                if max_shift.saturating_mul(2) > *a_len {
                    return arg("primes_i needs 2*max(|a|, |b|) <= A");
                }
                let side = |shift: i64| -> Result<(Interval, WeightSpec, MapSpec)> {
                    // n = p - shift ranges over [1, A - shift]
                    let hi = (*a_len as i128 - shift as i128).max(0) as u64;
                    let iv = Interval::new(1, hi)?;
                    Ok(if shift == 0 {
                        (iv, WeightSpec::PrimeIndicator, MapSpec::Identity)
                    } else {
                        (
                            iv,
                            WeightSpec::ShiftedPrimeIndicator { a: shift },
                            MapSpec::Affine { s: 1, t: shift },
                        )
                    })
                };
                let (ia, u, f) = side(*shift_a)?;
                let (ib, v, g) = side(*shift_b)?;
                Ok(DataCollection {
                    interval_a: ia,
                    interval_b: ib,
                    interval_n3: Interval::up_to(*x),
                    wp: expr("-n"),
                    u,
                    v,
                    f,
                    g,
                    target_m: 0,
                    guard: EvalGuardConfig::default(),
                })
            }
            Builtin::PrimesII { x } => {
                if *x < 2 {
                    return arg("primes_ii needs x >= 2");
                }
                let k = Interval::up_to(prime_pi(*x));
                Ok(DataCollection {
                    interval_a: k,
                    interval_b: k,
                    interval_n3: Interval::up_to(x.saturating_mul(2)),
                    wp: expr("-n"),
                    u: WeightSpec::Mobius,
                    v: WeightSpec::Mobius,
                    f: MapSpec::NthPrime,
                    g: MapSpec::NthPrime,
                    target_m: 0,
                    guard: EvalGuardConfig::default(),
                })
            }
            Builtin::Squarefree { x, nu, a_len } => {
                let w = match nu {
                    1 => WeightSpec::MobiusSquared,
                    2 => WeightSpec::Mobius,
                    _ => return arg("squarefree needs nu in {1, 2}"),
                };
                if a_len > x || *x < 1 {
                    return arg("squarefree needs 1 <= A <= x");
                }
                let iv = Interval::up_to(*a_len);
                Ok(DataCollection {
                    u: w.clone(),
                    v: w,
                    ..ones_collection(iv, Interval::up_to(*x), expr("-n"), 0)
                })
            }
            Builtin::Beatty { x, alpha, beta } => {
                if constant_value(alpha, "alpha")? <= 0.0 {
                    return arg("beatty needs alpha > 0");
                }
                constant_value(beta, "beta")?;
                let inner = format!("floor(({alpha})*n+({beta}))");
                let top = BracketExpr::parse(&inner)?.declare_integer_valued();
                let guard = EvalGuardConfig::default();
                let hi = match crate::bracket::eval_bracket(&top, to_i64(*x)?, &guard)? {
                    BracketValue::Integer(z) => i64::try_from(z)
                        .map_err(|_| Error::Argument("floor(alpha*x+beta) exceeds i64".into()))?,
                    _ => return Err(Error::Internal("floor did not yield an integer".into())),
                };
                if hi < 1 {
                    return arg("beatty needs floor(alpha*x + beta) >= 1");
                }
                Ok(ones_collection(
                    Interval::up_to(*x),
                    Interval::up_to(hi as u64),
                    expr(&format!("-{inner}")),
                    0,
                ))
            }
            Builtin::QuadraticResidue { m } => {
                if *m < 2 {
                    return arg("quadratic_residue needs m >= 2");
                }
                let wp = rem_bracket(&expr("n^2"), *m)?.negated();
                Ok(ones_collection(
                    Interval::up_to(*m),
                    Interval::up_to(m.saturating_mul(2)),
                    wp,
                    0,
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::eval_i64;

    #[test]
    fn every_builtin_validates() {
        let cases = [
            Builtin::PlainTernary { n: 6 },
            Builtin::PrimesI {
                x: 100,
                a_len: 20,
                shift_a: 0,
                shift_b: 0,
            },
            Builtin::PrimesI {
                x: 50,
                a_len: 50,
                shift_a: 1,
                shift_b: -3,
            },
            Builtin::PrimesII { x: 30 },
            Builtin::Squarefree { x: 30, nu: 1, a_len: 30 },
            Builtin::Beatty {
                x: 10,
                alpha: "sqrt(2)".into(),
                beta: "0".into(),
            },
            Builtin::QuadraticResidue { m: 11 },
            Builtin::SmallVar { n: 6, h: 1 },
        ];
        for b in cases {
            let dc = b.collection().unwrap();
            let rep = dc.validate();
            assert!(rep.is_valid(), "{b:?}: {:?}", rep.first_failure());
        }
    }

    #[test]
    fn primes_i_trivial_bound() {
        let dc = Builtin::PrimesI {
            x: 100,
            a_len: 20,
            shift_a: 0,
            shift_b: 0,
        }
        .collection()
        .unwrap();
        assert_eq!(dc.validate().trivial_bound, 20 * 100);
        assert_eq!(dc.validate().support_a, 8);
    }

    #[test]
    fn quadratic_residue_shape() {
        let dc = Builtin::QuadraticResidue { m: 11 }.collection().unwrap();
        assert_eq!(dc.interval_a, Interval::up_to(11));
        assert_eq!(dc.interval_n3, Interval::up_to(22));
        for n in 1..=22i64 {
            assert_eq!(eval_i64(&dc.wp, n, &dc.guard).unwrap(), -((n * n) % 11));
        }
    }

    #[test]
    fn squarefree_weights() {
        let dc = Builtin::Squarefree { x: 1000, nu: 2, a_len: 1000 }
            .collection()
            .unwrap();
        assert_eq!(dc.u, WeightSpec::Mobius);
        let dc = Builtin::Squarefree { x: 1000, nu: 1, a_len: 1000 }
            .collection()
            .unwrap();
        assert_eq!(dc.u, WeightSpec::MobiusSquared);
    }

    #[test]
    fn beatty_endpoint_follows_beta() {
        let p = |beta: &str| Builtin::Beatty {
            x: 10,
            alpha: "sqrt(2)".into(),
            beta: beta.into(),
        };
        assert_eq!(p("0").collection().unwrap().interval_n3.hi(), 14);
        assert_eq!(p("1").collection().unwrap().interval_n3.hi(), 15);
        assert!(Builtin::Beatty {
            x: 10,
            alpha: "n".into(),
            beta: "0".into()
        }
        .collection()
        .is_err());
    }

    #[test]
    fn parameter_errors() {
        assert!(builtin_collection("nope", &BuiltinParams::default()).is_err());
        assert!(builtin_collection("plain_ternary", &BuiltinParams::default()).is_err());
        let p = BuiltinParams {
            x: Some(100),
            a_len: Some(10),
            shift_a: Some(6),
            ..Default::default()
        };
        assert!(builtin_collection("primes_i", &p).is_err());
        assert!(Builtin::SmallVar { n: 5, h: 6 }.collection().is_err());
    }
}
