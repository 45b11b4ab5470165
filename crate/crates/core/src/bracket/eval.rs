//! Guarded evaluation of bracket polynomials.
//!
//! Rational constants are carried exactly. As soon as `pi`, `e` or an
//! irrational square root enters, the value becomes a binary float at the
//! working precision. Every floor/frac of such a float checks that its
//! argument is not within `eps * 2^(-prec/2) * max(1, |x|)` of an integer;
//! if it is, the whole evaluation restarts at twice the precision. Once the
//! maximum precision is exceeded the evaluation fails instead of guessing.

use super::bigfloat::{constant, BigFloat, ConstKey};
use super::{BracketExpr, Constant, Node};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalGuardConfig {
    pub precision_bits: u32,
    pub ambiguity_epsilon: f64,
    pub max_precision_bits: u32,
    /// Check `floor(x) + frac(x) = x` and `0 <= frac(x) < 1` at every node.
    #[serde(default)]
    pub debug_checks: bool,
}

impl Default for EvalGuardConfig {
    fn default() -> Self {
        Self {
            precision_bits: 192,
            ambiguity_epsilon: 1.0,
            max_precision_bits: 1024,
            debug_checks: false,
        }
    }
}

impl EvalGuardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 64 {
            return Err(Error::Argument("precision_bits must be at least 64".into()));
        }
        if self.precision_bits > self.max_precision_bits {
            return Err(Error::Argument(
                "precision_bits exceeds max_precision_bits".into(),
            ));
        }
        if !(self.ambiguity_epsilon > 0.0 && self.ambiguity_epsilon.is_finite()) {
            return Err(Error::Argument("ambiguity_epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BracketValue {
    Integer(BigInt),
    Rational(BigRational),
    Real(f64),
}

impl BracketValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            BracketValue::Integer(z) => z.to_f64().unwrap_or(f64::NAN),
            BracketValue::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            BracketValue::Real(x) => *x,
        }
    }

    pub fn as_integer(&self) -> Option<&BigInt> {
        match self {
            BracketValue::Integer(z) => Some(z),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
enum Val {
    Exact(BigRational),
    Float(BigFloat),
}

enum Halt {
    /// Precision too low; `true` when a floor/frac branch was undecided.
    Escalate(bool),
    Fatal(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Fatal(e)
    }
}

struct Ctx<'g> {
    n: i64,
    prec: u32,
    guard: &'g EvalGuardConfig,
}

impl Ctx<'_> {
    fn to_float(&self, v: &Val) -> BigFloat {
        match v {
            Val::Exact(r) => BigFloat::from_ratio(r, self.prec),
            Val::Float(f) => f.clone(),
        }
    }

    /// `log2` of the distance below which a float is too close to call.
    fn ambiguity_log2(&self, x: &BigFloat) -> f64 {
        self.guard.ambiguity_epsilon.log2() + x.log2_abs().max(0.0) - self.prec as f64 / 2.0
    }

    fn is_ambiguous(&self, x: &BigFloat, frac: &BigFloat) -> bool {
        if frac.is_zero() {
            return true;
        }
        let up = frac.one_minus(self.prec);
        let dist = frac.log2_abs().min(up.log2_abs());
        dist < self.ambiguity_log2(x)
    }

    fn eval(&self, node: &Node) -> std::result::Result<Val, Halt> {
        Ok(match node {
            Node::Var => Val::Exact(BigRational::from_integer(BigInt::from(self.n))),
            Node::Const(c) => match c {
                Constant::Rational(r) => Val::Exact(r.clone()),
                Constant::Pi => Val::Float(constant(ConstKey::Pi, self.prec)),
                Constant::E => Val::Float(constant(ConstKey::E, self.prec)),
                Constant::Sqrt(k) => {
                    let r = crate::arith::isqrt(*k);
                    if r * r == *k {
                        Val::Exact(BigRational::from_integer(BigInt::from(r)))
                    } else {
                        Val::Float(constant(ConstKey::Sqrt(*k), self.prec))
                    }
                }
            },
            Node::Add(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Val::Exact(x), Val::Exact(y)) => Val::Exact(x + y),
                (x, y) => Val::Float(self.to_float(&x).add(&self.to_float(&y), self.prec)),
            },
            Node::Mul(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Val::Exact(x), Val::Exact(y)) => Val::Exact(x * y),
                (Val::Exact(z), _) | (_, Val::Exact(z)) if z.is_zero() => Val::Exact(z),
                (x, y) => Val::Float(self.to_float(&x).mul(&self.to_float(&y), self.prec)),
            },
            Node::Floor(a) => {
                let x = self.eval(a)?;
                let (fl, _) = self.split(&x)?;
                Val::Exact(BigRational::from_integer(fl))
            }
            Node::Frac(a) => {
                let x = self.eval(a)?;
                let (_, fr) = self.split(&x)?;
                fr
            }
        })
    }

    fn split(&self, x: &Val) -> std::result::Result<(BigInt, Val), Halt> {
        match x {
            Val::Exact(r) => {
                let fl = r.floor().to_integer();
                let fr = r - BigRational::from_integer(fl.clone());
                if self.guard.debug_checks {
                    let ok = !fr.is_negative() && fr < BigRational::one();
                    if !ok || BigRational::from_integer(fl.clone()) + &fr != *r {
                        return Err(Halt::Fatal(Error::Internal(format!(
                            "floor/frac identity failed at n = {}",
                            self.n
                        ))));
                    }
                }
                Ok((fl, Val::Exact(fr)))
            }
            Val::Float(f) => {
                let fr = f.frac(self.prec);
                if self.is_ambiguous(f, &fr) {
                    return Err(Halt::Escalate(true));
                }
                if self.guard.debug_checks {
                    let v = fr.to_f64();
                    if !(0.0..1.0).contains(&v) {
                        return Err(Halt::Fatal(Error::Internal(format!(
                            "frac out of range at n = {}",
                            self.n
                        ))));
                    }
                }
                Ok((f.floor(), Val::Float(fr)))
            }
        }
    }
}

enum Finish {
    Value,
    Integer,
    Phase,
}

enum Out {
    Value(BracketValue),
    Phase(f64),
}

/// Reusable evaluator bound to one expression and one guard configuration.
#[derive(Debug, Clone)]
pub struct Evaluator {
    expr: BracketExpr,
    guard: EvalGuardConfig,
    int_poly: bool,
}

impl Evaluator {
    pub fn new(expr: &BracketExpr, guard: EvalGuardConfig) -> Result<Self> {
        guard.validate()?;
        Ok(Self {
            int_poly: expr.is_integer_polynomial(),
            expr: expr.clone(),
            guard,
        })
    }

    pub fn expr(&self) -> &BracketExpr {
        &self.expr
    }

    pub fn eval(&self, n: i64) -> Result<BracketValue> {
        let finish = if self.expr.is_integer_valued() {
            Finish::Integer
        } else {
            Finish::Value
        };
        match self.run(n, finish)? {
            Out::Value(v) => Ok(v),
            Out::Phase(_) => unreachable!(),
        }
    }

    /// Integer value; requires an integer-valued expression whose values fit i64.
    pub fn eval_i64(&self, n: i64) -> Result<i64> {
        if self.int_poly {
            if let Some(v) = int_poly_eval(self.expr.root(), n as i128) {
                return i64::try_from(v)
                    .map_err(|_| Error::Argument(format!("value at n = {n} exceeds i64")));
            }
        }
        match self.run(n, Finish::Integer)? {
            Out::Value(BracketValue::Integer(z)) => z
                .to_i64()
                .ok_or_else(|| Error::Argument(format!("value at n = {n} exceeds i64"))),
            _ => unreachable!(),
        }
    }

    /// `frac(p(n))` as a double in `[0, 1)`.
    pub fn phase(&self, n: i64) -> Result<f64> {
        match self.run(n, Finish::Phase)? {
            Out::Phase(t) => Ok(t),
            Out::Value(_) => unreachable!(),
        }
    }

    fn run(&self, n: i64, finish: Finish) -> Result<Out> {
        let mut prec = self.guard.precision_bits;
        loop {
            let ctx = Ctx {
                n,
                prec,
                guard: &self.guard,
            };
            let attempt = ctx
                .eval(self.expr.root())
                .and_then(|v| finish_value(&ctx, v, &finish));
            match attempt {
                Ok(out) => return Ok(out),
                Err(Halt::Fatal(e)) => return Err(e),
                Err(Halt::Escalate(branch)) => {
                    if prec >= self.guard.max_precision_bits {
                        return Err(if branch {
                            Error::AmbiguousBranch { n, bits: prec }
                        } else {
                            Error::IntegralityViolation { n }
                        });
                    }
                    prec = prec.saturating_mul(2).min(self.guard.max_precision_bits);
                }
            }
        }
    }
}

fn finish_value(ctx: &Ctx<'_>, v: Val, finish: &Finish) -> std::result::Result<Out, Halt> {
    match (finish, v) {
        (Finish::Value, Val::Exact(r)) => Ok(Out::Value(if r.is_integer() {
            BracketValue::Integer(r.to_integer())
        } else {
            BracketValue::Rational(r)
        })),
        (Finish::Value, Val::Float(f)) => Ok(Out::Value(BracketValue::Real(f.to_f64()))),
        (Finish::Integer, Val::Exact(r)) => {
            if r.is_integer() {
                Ok(Out::Value(BracketValue::Integer(r.to_integer())))
            } else {
                Err(Halt::Fatal(Error::IntegralityViolation { n: ctx.n }))
            }
        }
        (Finish::Integer, Val::Float(f)) => {
            let half = BigFloat::from_ratio(&BigRational::new(1.into(), 2.into()), ctx.prec);
            let z = f.add(&half, ctx.prec).floor();
            let diff = f.add(&BigFloat::from_int(-z.clone()), ctx.prec);
            if diff.is_zero() || diff.log2_abs() < ctx.ambiguity_log2(&f) {
                Ok(Out::Value(BracketValue::Integer(z)))
            } else {
                Err(Halt::Escalate(false))
            }
        }
        (Finish::Phase, Val::Exact(r)) => {
            let fr = r.clone() - BigRational::from_integer(r.floor().to_integer());
            Ok(Out::Phase(wrap_unit(fr.to_f64().unwrap_or(0.0))))
        }
        (Finish::Phase, Val::Float(f)) => Ok(Out::Phase(wrap_unit(f.frac(ctx.prec).to_f64()))),
    }
}

fn wrap_unit(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

fn int_poly_eval(node: &Node, n: i128) -> Option<i128> {
    match node {
        Node::Var => Some(n),
        Node::Const(Constant::Rational(r)) => r.to_integer().to_i128(),
        Node::Add(a, b) => int_poly_eval(a, n)?.checked_add(int_poly_eval(b, n)?),
        Node::Mul(a, b) => int_poly_eval(a, n)?.checked_mul(int_poly_eval(b, n)?),
        _ => None,
    }
}

/// One-shot evaluation.
pub fn eval_bracket(expr: &BracketExpr, n: i64, guard: &EvalGuardConfig) -> Result<BracketValue> {
    Evaluator::new(expr, *guard)?.eval(n)
}

pub fn eval_i64(expr: &BracketExpr, n: i64, guard: &EvalGuardConfig) -> Result<i64> {
    Evaluator::new(expr, *guard)?.eval_i64(n)
}

pub fn eval_phase(expr: &BracketExpr, n: i64, guard: &EvalGuardConfig) -> Result<f64> {
    Evaluator::new(expr, *guard)?.phase(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::{parse_bracket, rem_bracket};

    fn int_at(text: &str, n: i64) -> i64 {
        let e = parse_bracket(text).unwrap().declare_integer_valued();
        eval_i64(&e, n, &EvalGuardConfig::default()).unwrap()
    }

    #[test]
    fn worked_values() {
        assert_eq!(int_at("floor(pi*n)", 1), 3);
        assert_eq!(int_at("-floor(sqrt(2)*n + 0)", 5), -7);
        assert_eq!(int_at("-floor(0.5*n+0.25)", 3), -1);
    }

    #[test]
    fn rem_values() {
        let sq = parse_bracket("n^2").unwrap().declare_integer_valued();
        let r7 = rem_bracket(&sq, 7).unwrap();
        assert_eq!(eval_i64(&r7, 4, &EvalGuardConfig::default()).unwrap(), 2);
        let lin = parse_bracket("n").unwrap().declare_integer_valued();
        let r5 = rem_bracket(&lin, 5).unwrap();
        assert_eq!(eval_i64(&r5, 12, &EvalGuardConfig::default()).unwrap(), 2);
        assert_eq!(eval_i64(&r5, -3, &EvalGuardConfig::default()).unwrap(), 2);
        let r11 = rem_bracket(&sq, 11).unwrap();
        for n in 1..=11i64 {
            assert_eq!(
                eval_i64(&r11, n, &EvalGuardConfig::default()).unwrap(),
                (n * n) % 11
            );
        }
    }

    #[test]
    fn integrality_violation() {
        let e = parse_bracket("0.5*n").unwrap().declare_integer_valued();
        assert!(matches!(
            eval_i64(&e, 3, &EvalGuardConfig::default()),
            Err(Error::IntegralityViolation { n: 3 })
        ));
        let e = parse_bracket("sqrt(2)*n").unwrap().declare_integer_valued();
        assert!(matches!(
            eval_bracket(&e, 3, &EvalGuardConfig::default()),
            Err(Error::IntegralityViolation { n: 3 })
        ));
    }

    #[test]
    fn symbolic_integer_is_ambiguous() {
        // sqrt(2)*sqrt(2) = 2 exactly, but only symbolically
        let e = parse_bracket("floor(sqrt(2)*sqrt(2)*n)").unwrap();
        match eval_bracket(&e, 3, &EvalGuardConfig::default()) {
            Err(Error::AmbiguousBranch { n: 3, bits }) => assert_eq!(bits, 1024),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn real_output_and_phase() {
        let e = parse_bracket("n*sqrt(2)").unwrap();
        let v = eval_bracket(&e, 3, &EvalGuardConfig::default()).unwrap();
        assert!((v.to_f64() - 3.0 * std::f64::consts::SQRT_2).abs() < 1e-15);
        let t = eval_phase(&e, 3, &EvalGuardConfig::default()).unwrap();
        assert!((t - (3.0 * std::f64::consts::SQRT_2).fract()).abs() < 1e-14);
        let half = parse_bracket("0.5*n").unwrap();
        assert_eq!(eval_phase(&half, 7, &EvalGuardConfig::default()).unwrap(), 0.5);
        assert_eq!(eval_phase(&half, -7, &EvalGuardConfig::default()).unwrap(), 0.5);
    }

    #[test]
    fn large_argument_escalates_cleanly() {
        // n^3 * sqrt(7) near 2^189 needs more than 192 bits to pin its floor
        let e = parse_bracket("floor(n^3*sqrt(7))").unwrap().declare_integer_valued();
        let n = i64::MAX;
        let v = eval_bracket(&e, n, &EvalGuardConfig::default()).unwrap();
        let wide = EvalGuardConfig {
            precision_bits: 1024,
            max_precision_bits: 4096,
            ..Default::default()
        };
        assert_eq!(v, eval_bracket(&e, n, &wide).unwrap());
    }

    #[test]
    fn debug_checks_pass() {
        let guard = EvalGuardConfig {
            debug_checks: true,
            ..Default::default()
        };
        let e = parse_bracket("frac(n^3*sqrt(7)+floor(pi*n)) + frac(-0.3*n)").unwrap();
        for n in -50..50 {
            eval_bracket(&e, n, &guard).unwrap();
        }
    }

    #[test]
    fn guard_validation() {
        let bad = EvalGuardConfig {
            precision_bits: 32,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = EvalGuardConfig {
            precision_bits: 512,
            max_precision_bits: 256,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
