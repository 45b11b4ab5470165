//! Number theory toolkit for trilinear Mobius sums with bracket polynomial data.

// NaN must fail these range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accum;
pub mod apps;
pub mod arith;
pub mod bracket;
pub mod collection;
pub mod engine;
pub mod error;
pub mod expsum;
pub mod goldbach;
pub mod selftest;
pub mod sieve;

pub use error::{Error, ErrorCategory, Result};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
