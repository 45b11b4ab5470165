//! Small integer helpers shared across modules.

#[inline]
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// Integer square root, floor.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let n128 = n as u128;
    let mut r = ((n as f64).sqrt() as u64).min(u32::MAX as u64) as u128;
    while r * r > n128 {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n128 {
        r += 1;
    }
    r as u64
}

/// Möbius function by trial division. Slow; used as a reference.
pub fn mobius_trial(mut n: u64) -> i8 {
    assert!(n >= 1);
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Distinct prime factors by trial division, ascending.
pub fn prime_factors_trial(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn is_prime_trial(n: u64) -> bool {
    n >= 2 && prime_factors_trial(n) == [n]
}
