//! Summation helpers with a fixed evaluation shape.
//!
//! Every parallel reduction in the crate goes through [`tree_reduce`], which
//! combines shard partials in a balanced tree keyed only by shard index. The
//! result is therefore bit-identical for any worker count.

use num_complex::Complex64;
use std::ops::Add;

/// Neumaier-compensated sum of `f64` terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated accumulation of complex terms, component-wise.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplex {
    re: Compensated,
    im: Compensated,
}

impl CompensatedComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Streaming pairwise summation.
///
/// Terms are grouped into blocks of `BLOCK` which are summed left to right;
/// block sums are merged like a binary counter, so the reduction tree depends
/// only on the number of terms.
#[derive(Debug, Clone, Default)]
pub struct Pairwise {
    block: f64,
    filled: usize,
    // stack[i] holds the sum of 2^levels[i] blocks
    stack: Vec<(u32, f64)>,
}

impl Pairwise {
    const BLOCK: usize = 64;

    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        self.block += x;
        self.filled += 1;
        if self.filled == Self::BLOCK {
            self.push(self.block);
            self.block = 0.0;
            self.filled = 0;
        }
    }

    fn push(&mut self, value: f64) {
        let mut level = 0u32;
        let mut value = value;
        while let Some(&(top_level, top)) = self.stack.last() {
            if top_level != level {
                break;
            }
            self.stack.pop();
            value += top;
            level += 1;
        }
        self.stack.push((level, value));
    }

    pub fn value(&self) -> f64 {
        let mut total = self.block;
        for &(_, v) in self.stack.iter().rev() {
            total += v;
        }
        total
    }
}

/// Sums a slice with the same shape as [`Pairwise`].
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    let mut acc = Pairwise::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Reduces shard partials in a balanced binary tree over their indices.
pub fn tree_reduce<T>(mut parts: Vec<T>, zero: T) -> T
where
    T: Add<Output = T> + Clone,
{
    if parts.is_empty() {
        return zero;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().unwrap()
}
