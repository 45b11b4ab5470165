//! Minimal binary floating point on top of `BigInt`: `mant * 2^exp`, with
//! the mantissa truncated to a working precision after every operation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BigFloat {
    mant: BigInt,
    exp: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        Self {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int(v: BigInt) -> Self {
        Self { mant: v, exp: 0 }
    }

    fn new(mant: BigInt, exp: i64, prec: u32) -> Self {
        Self { mant, exp }.round(prec)
    }

    fn round(mut self, prec: u32) -> Self {
        let bits = self.mant.bits();
        if bits > prec as u64 {
            let sh = bits - prec as u64;
            self.mant >>= sh;
            self.exp += sh as i64;
        }
        if self.mant.is_zero() {
            self.exp = 0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// Position of the leading bit: `|x| < 2^magnitude()`.
    pub fn magnitude(&self) -> i64 {
        if self.mant.is_zero() {
            i64::MIN / 4
        } else {
            self.mant.bits() as i64 + self.exp
        }
    }

    pub fn from_ratio(r: &BigRational, prec: u32) -> Self {
        let (num, den) = (r.numer(), r.denom());
        if num.is_zero() {
            return Self::zero();
        }
        let shift = prec as i64 + 2 + den.bits() as i64 - num.bits() as i64;
        let q = if shift >= 0 {
            (num << shift as u64).div_floor(den)
        } else {
            num.div_floor(&(den << (-shift) as u64))
        };
        Self::new(q, -shift, prec)
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        if self.is_zero() {
            return other.clone().round(prec);
        }
        if other.is_zero() {
            return self.clone().round(prec);
        }
        let (hi, lo) = if self.magnitude() >= other.magnitude() {
            (self, other)
        } else {
            (other, self)
        };
        // lo is below the last retained bit of the result
        if hi.magnitude() - lo.magnitude() > prec as i64 + 4 {
            return hi.clone().round(prec);
        }
        let e = hi.exp.min(lo.exp);
        let a = &hi.mant << (hi.exp - e) as u64;
        let b = &lo.mant << (lo.exp - e) as u64;
        Self::new(a + b, e, prec)
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        Self::new(&self.mant * &other.mant, self.exp + other.exp, prec)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            // arithmetic shift rounds towards negative infinity
            &self.mant >> (-self.exp) as u64
        }
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn frac(&self, prec: u32) -> Self {
        if self.exp >= 0 {
            return Self::zero();
        }
        let fl = self.floor();
        let diff = &self.mant - (fl << (-self.exp) as u64);
        Self::new(diff, self.exp, prec)
    }

    /// `log2 |self|` to roughly double precision.
    pub fn log2_abs(&self) -> f64 {
        if self.mant.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mant.bits() as i64;
        let keep = bits.min(60);
        let top = (self.mant.abs() >> (bits - keep) as u64).to_f64().unwrap();
        top.log2() + (bits - keep + self.exp) as f64
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let keep = bits.min(64);
        let top = (&self.mant >> (bits - keep) as u64).to_f64().unwrap();
        let e = bits - keep + self.exp;
        if e > 1100 {
            return top.signum() * f64::INFINITY;
        }
        if e < -1200 {
            return 0.0;
        }
        top * 2f64.powi(e as i32)
    }

    pub fn one_minus(&self, prec: u32) -> Self {
        let one = Self::from_int(BigInt::one());
        let neg = Self {
            mant: -&self.mant,
            exp: self.exp,
        };
        one.add(&neg, prec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum ConstKey {
    Pi,
    E,
    Sqrt(u64),
}

fn cache() -> &'static Mutex<HashMap<(ConstKey, u32), BigFloat>> {
    static CACHE: OnceLock<Mutex<HashMap<(ConstKey, u32), BigFloat>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Approximation of a named constant with relative error below `2^(-prec)`.
pub(crate) fn constant(key: ConstKey, prec: u32) -> BigFloat {
    if let Some(v) = cache().lock().unwrap().get(&(key, prec)) {
        return v.clone();
    }
    let guard = prec as u64 + 32;
    let v = match key {
        ConstKey::Pi => BigFloat::new(pi_fixed(guard), -(guard as i64), prec),
        ConstKey::E => BigFloat::new(e_fixed(guard), -(guard as i64), prec),
        ConstKey::Sqrt(k) => {
            let scaled = BigInt::from(k) << (2 * guard);
            BigFloat::new(scaled.sqrt(), -(guard as i64), prec)
        }
    };
    cache().lock().unwrap().insert((key, prec), v.clone());
    v
}

/// floor(pi * 2^bits) up to a few units, via Machin's formula.
fn pi_fixed(bits: u64) -> BigInt {
    let one = BigInt::one() << (bits + 8);
    let pi = atan_inv(5, &one) * 16 - atan_inv(239, &one) * 4;
    pi >> 8u64
}

fn atan_inv(x: u32, one: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut term = one / &x;
    let mut sum = term.clone();
    let mut k = 1u64;
    loop {
        term /= &x2;
        if term.is_zero() {
            break;
        }
        let t = &term / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
    sum
}

fn e_fixed(bits: u64) -> BigInt {
    let one = BigInt::one() << (bits + 8);
    let mut term = one.clone();
    let mut sum = one;
    let mut k = 1u64;
    loop {
        term /= BigInt::from(k);
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    sum >> 8u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_to_double() {
        assert_eq!(constant(ConstKey::Pi, 128).to_f64(), std::f64::consts::PI);
        assert_eq!(constant(ConstKey::E, 128).to_f64(), std::f64::consts::E);
        assert_eq!(constant(ConstKey::Sqrt(2), 128).to_f64(), std::f64::consts::SQRT_2);
    }

    #[test]
    fn pi_digits() {
        // 3.14159265358979323846264338327950288419716939937510...
        let p = constant(ConstKey::Pi, 256);
        let scaled = p.mul(&BigFloat::from_int(BigInt::from(10).pow(50)), 256);
        assert_eq!(
            scaled.floor().to_string(),
            "314159265358979323846264338327950288419716939937510"
        );
    }

    #[test]
    fn floor_of_negative() {
        let x = BigFloat::from_ratio(&BigRational::new((-7).into(), 2.into()), 64);
        assert_eq!(x.floor(), BigInt::from(-4));
        assert_eq!(x.frac(64).to_f64(), 0.5);
    }

    #[test]
    fn add_cancels() {
        let a = BigFloat::from_ratio(&BigRational::new(1.into(), 3.into()), 100);
        let b = BigFloat::from_ratio(&BigRational::new((-1).into(), 3.into()), 100);
        assert!(a.add(&b, 100).log2_abs() < -95.0);
    }
}
