//! The data collection `D = (A, B, N3, wp, u, v, f, g)` together with the
//! target `M`, plus validation and materialization into flat term lists.
//!
//! The ternary sum over a collection is
//!
//! ```text
//! S(D; M) = sum u[n1] v[n2] mu(n1 n2 n3)
//!           over n1 in A, n2 in B, n3 in N3 with f(n1) + g(n2) + wp(n3) = M.
//! ```

mod builtin;
mod config;
mod random;

pub use builtin::{builtin_collection, Builtin, BuiltinParams, BUILTIN_NAMES};
pub use config::{CollectionConfig, IntervalsConfig, MapConfig, WeightConfig};
pub use random::random_collection;

use crate::bracket::{BracketExpr, EvalGuardConfig, Evaluator};
use crate::error::{arg, Error, Result};
use crate::sieve::{map_blocks, mobius_range, nth_primes, DEFAULT_BLOCK_CAPACITY, DEFAULT_PRIME_BUDGET};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]` of positive integers; empty when `hi = lo - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u64; 2]", into = "[u64; 2]")]
pub struct Interval {
    lo: u64,
    hi: u64,
}

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo < 1 {
            return arg(format!("interval [{lo}, {hi}] must start at 1 or later"));
        }
        if hi.checked_add(1).is_none_or(|h1| h1 < lo) {
            return arg(format!("interval [{lo}, {hi}] has hi < lo - 1"));
        }
        if hi > i64::MAX as u64 {
            return arg("interval exceeds 2^63 - 1");
        }
        Ok(Self { lo, hi })
    }

    /// `[1, n]`.
    pub fn up_to(n: u64) -> Self {
        Self { lo: 1, hi: n }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> u64 {
        (self.hi + 1).saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }
}

impl TryFrom<[u64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [u64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [u64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

/// Weight generator for `u` or `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum WeightSpec {
    Ones,
    Mobius,
    MobiusSquared,
    PrimeIndicator,
    /// `u[n] = 1` when `n + a` is prime.
    ShiftedPrimeIndicator { a: i64 },
    /// `values[i]` is the weight at `lo + i`.
    Table { values: Vec<Complex64> },
}

/// Injective map `f` or `g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    /// `n -> s*n + t`, `s != 0`.
    Affine { s: i64, t: i64 },
    /// `k -> p_k`.
    NthPrime,
    /// `values[i]` is the image of `lo + i`.
    Table { values: Vec<i64> },
}

/// One nonzero-weight point of `A` or `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportPoint {
    pub n: u64,
    pub weight: Complex64,
    /// The weight as an integer when the generator is integral.
    pub int_weight: i64,
}

impl WeightSpec {
    /// True when every weight is a (small) integer, so sums can be exact.
    pub fn is_integral(&self) -> bool {
        match self {
            WeightSpec::Table { values } => values
                .iter()
                .all(|z| z.im == 0.0 && z.re.fract() == 0.0 && z.re.abs() <= 1.0),
            _ => true,
        }
    }

    /// Points of `iv` with nonzero weight, ascending.
    pub fn support(&self, iv: Interval) -> Result<Vec<SupportPoint>> {
        let one = |n: u64, w: i64| SupportPoint {
            n,
            weight: Complex64::new(w as f64, 0.0),
            int_weight: w,
        };
        if iv.is_empty() {
            return Ok(Vec::new());
        }
        Ok(match self {
            WeightSpec::Ones => iv.iter().map(|n| one(n, 1)).collect(),
            WeightSpec::Mobius | WeightSpec::MobiusSquared => {
                let squared = matches!(self, WeightSpec::MobiusSquared);
                mobius_range(iv.lo, iv.hi)?
                    .into_iter()
                    .zip(iv.iter())
                    .filter(|(m, _)| *m != 0)
                    .map(|(m, n)| one(n, if squared { 1 } else { m as i64 }))
                    .collect()
            }
            WeightSpec::PrimeIndicator => primes_in(iv.lo, iv.hi)?
                .into_iter()
                .map(|p| one(p, 1))
                .collect(),
            WeightSpec::ShiftedPrimeIndicator { a } => {
                let lo = iv.lo as i128 + *a as i128;
                let hi = iv.hi as i128 + *a as i128;
                if hi < 2 {
                    Vec::new()
                } else {
                    if hi > i64::MAX as i128 {
                        return arg("shifted prime indicator leaves the 63-bit range");
                    }
                    primes_in(lo.max(2) as u64, hi as u64)?
                        .into_iter()
                        .map(|p| one((p as i128 - *a as i128) as u64, 1))
                        .collect()
                }
            }
            WeightSpec::Table { values } => {
                check_table_len("weight", values.len(), iv)?;
                let integral = self.is_integral();
                iv.iter()
                    .zip(values)
                    .filter(|(_, z)| **z != Complex64::new(0.0, 0.0))
                    .map(|(n, &z)| SupportPoint {
                        n,
                        weight: z,
                        int_weight: if integral { z.re as i64 } else { 0 },
                    })
                    .collect()
            }
        })
    }
}

fn check_table_len(what: &str, len: usize, iv: Interval) -> Result<()> {
    if len as u64 != iv.len() {
        return Err(Error::Validation(format!(
            "{what} table has {len} entries but the interval [{}, {}] has {}",
            iv.lo,
            iv.hi,
            iv.len()
        )));
    }
    Ok(())
}

fn primes_in(lo: u64, hi: u64) -> Result<Vec<u64>> {
    let parts = map_blocks(lo, hi, DEFAULT_BLOCK_CAPACITY, |b| {
        (0..b.len())
            .filter(|&i| b.prime_bits().get(i))
            .map(|i| b.lo() + i as u64)
            .collect::<Vec<_>>()
    })?;
    Ok(parts.concat())
}

impl MapSpec {
    /// Images of the ascending points `ns` (all inside `iv`).
    pub fn images(&self, ns: &[u64], iv: Interval) -> Result<Vec<i64>> {
        let to_i64 = |v: i128| {
            i64::try_from(v).map_err(|_| Error::Argument("map value exceeds i64".into()))
        };
        match self {
            MapSpec::Identity => ns.iter().map(|&n| to_i64(n as i128)).collect(),
            MapSpec::Affine { s, t } => {
                if *s == 0 {
                    return arg("affine map needs s != 0");
                }
                ns.iter()
                    .map(|&n| to_i64(*s as i128 * n as i128 + *t as i128))
                    .collect()
            }
            MapSpec::NthPrime => {
                let (Some(&first), Some(&last)) = (ns.first(), ns.last()) else {
                    return Ok(Vec::new());
                };
                let primes = nth_primes(first, last, DEFAULT_PRIME_BUDGET)?;
                ns.iter()
                    .map(|&k| to_i64(primes[(k - first) as usize] as i128))
                    .collect()
            }
            MapSpec::Table { values } => {
                check_table_len("map", values.len(), iv)?;
                Ok(ns.iter().map(|&n| values[(n - iv.lo) as usize]).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataCollection {
    pub interval_a: Interval,
    pub interval_b: Interval,
    pub interval_n3: Interval,
    #[serde(with = "expr_text")]
    pub wp: BracketExpr,
    pub u: WeightSpec,
    pub v: WeightSpec,
    pub f: MapSpec,
    pub g: MapSpec,
    pub target_m: i64,
    #[serde(default)]
    pub guard: EvalGuardConfig,
}

mod expr_text {
    use crate::bracket::BracketExpr;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(e: &BracketExpr, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(e.label())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BracketExpr, D::Error> {
        let text = String::deserialize(d)?;
        BracketExpr::parse(&text)
            .map(BracketExpr::declare_integer_valued)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// `|A ∩ Supp(u)|`
    pub support_a: u64,
    /// `|B ∩ Supp(v)|`
    pub support_b: u64,
    /// `min(|A|, |B|) * |N3|`
    pub trivial_bound: u128,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.first_failure() {
            Some(c) => Err(Error::Validation(format!("{}: {}", c.name, c.detail))),
            None => Ok(self),
        }
    }
}

/// Terms of one side (`A` with `u`, `f`, or `B` with `v`, `g`).
#[derive(Debug, Clone, PartialEq)]
pub struct SideTerm {
    pub n: u64,
    pub mu: i8,
    pub weight: Complex64,
    pub int_weight: i64,
    pub image: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct N3Term {
    pub n: u64,
    pub mu: i8,
    pub wp: i64,
}

/// A validated collection flattened into arrays the engine iterates over.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub a: Vec<SideTerm>,
    pub b: Vec<SideTerm>,
    pub n3: Vec<N3Term>,
    pub integral: bool,
    pub target_m: i64,
    pub trivial_bound: u128,
    pub interval_n3: Interval,
    /// `|A| * |B| * |N3|`, the size of the literal triple loop.
    pub triple_count: u128,
}

impl DataCollection {
    pub fn trivial_bound(&self) -> u128 {
        self.interval_a.len().min(self.interval_b.len()) as u128 * self.interval_n3.len() as u128
    }

    pub fn is_integral(&self) -> bool {
        self.u.is_integral() && self.v.is_integral()
    }

    pub fn with_target(&self, m: i64) -> Self {
        Self {
            target_m: m,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let mut push = |name: &str, res: std::result::Result<(), String>| {
            checks.push(Check {
                name: name.to_string(),
                passed: res.is_ok(),
                detail: res.err().unwrap_or_default(),
            })
        };
        push(
            "wp integer-valued",
            if self.wp.is_integer_valued() {
                Ok(())
            } else {
                Err(format!("`{}` is not declared integer-valued", self.wp))
            },
        );
        let mut support_sizes = [0u64; 2];
        let sides = [
            ("u", "f", &self.u, &self.f, self.interval_a),
            ("v", "g", &self.v, &self.g, self.interval_b),
        ];
        for (k, (wname, mname, w, m, iv)) in sides.into_iter().enumerate() {
            push(&format!("{wname} sup-norm <= 1"), norm_check(w, iv));
            match w.support(iv) {
                Ok(supp) => {
                    support_sizes[k] = supp.len() as u64;
                    let ns: Vec<u64> = supp.iter().map(|p| p.n).collect();
                    push(
                        &format!("{mname} injective on support of {wname}"),
                        injectivity_check(m, &ns, iv),
                    );
                }
                Err(e) => push(&format!("{wname} support"), Err(e.to_string())),
            }
        }
        ValidationReport {
            checks,
            support_a: support_sizes[0],
            support_b: support_sizes[1],
            trivial_bound: self.trivial_bound(),
        }
    }

    /// Validates and flattens the collection.
    pub fn materialize(&self) -> Result<Materialized> {
        self.validate().into_result()?;
        let a = side_terms(&self.u, &self.f, self.interval_a)?;
        let b = side_terms(&self.v, &self.g, self.interval_b)?;
        let iv = self.interval_n3;
        let mu3 = mobius_range(iv.lo, iv.hi)?;
        let eval = Evaluator::new(&self.wp, self.guard)?;
        let n3 = iv
            .iter()
            .zip(mu3)
            .map(|(n, mu)| {
                let n_i = i64::try_from(n).map_err(|_| Error::Argument("n3 exceeds i64".into()))?;
                Ok(N3Term {
                    n,
                    mu,
                    wp: eval.eval_i64(n_i)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Materialized {
            a,
            b,
            n3,
            integral: self.is_integral(),
            target_m: self.target_m,
            trivial_bound: self.trivial_bound(),
            interval_n3: iv,
            triple_count: self.interval_a.len() as u128
                * self.interval_b.len() as u128
                * iv.len() as u128,
        })
    }
}

fn side_terms(w: &WeightSpec, m: &MapSpec, iv: Interval) -> Result<Vec<SideTerm>> {
    let supp = w.support(iv)?;
    let ns: Vec<u64> = supp.iter().map(|p| p.n).collect();
    let images = m.images(&ns, iv)?;
    let mu = mobius_range(iv.lo, iv.hi)?;
    Ok(supp
        .into_iter()
        .zip(images)
        .map(|(p, image)| SideTerm {
            n: p.n,
            mu: mu[(p.n - iv.lo) as usize],
            weight: p.weight,
            int_weight: p.int_weight,
            image,
        })
        .collect())
}

fn norm_check(w: &WeightSpec, iv: Interval) -> std::result::Result<(), String> {
    if let WeightSpec::Table { values } = w {
        if values.len() as u64 != iv.len() {
            return Err(format!(
                "table has {} entries for an interval of length {}",
                values.len(),
                iv.len()
            ));
        }
        for (n, z) in iv.iter().zip(values) {
            if !(z.norm() <= 1.0) {
                return Err(format!("weight at n = {n} has modulus {}", z.norm()));
            }
        }
    }
    Ok(())
}

/// Sort-and-scan injectivity test; reports the colliding pair whose larger
/// element is smallest.
fn injectivity_check(m: &MapSpec, ns: &[u64], iv: Interval) -> std::result::Result<(), String> {
    if let MapSpec::Affine { s: 0, .. } = m {
        return Err("affine map with s = 0".into());
    }
    let images = m.images(ns, iv).map_err(|e| e.to_string())?;
    let mut pairs: Vec<(i64, u64)> = images.into_iter().zip(ns.iter().copied()).collect();
    pairs.sort_unstable();
    let mut worst: Option<(u64, u64)> = None;
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            let cand = (w[0].1, w[1].1);
            if worst.is_none_or(|(_, b)| cand.1 < b) {
                worst = Some(cand);
            }
        }
    }
    match worst {
        Some((x, y)) => {
            // report the earliest partner of y
            let image_y = pairs.iter().find(|p| p.1 == y).unwrap().0;
            let first = pairs
                .iter()
                .filter(|p| p.0 == image_y)
                .map(|p| p.1)
                .min()
                .unwrap_or(x);
            Err(format!("collision between n = {first} and n = {y} (value {image_y})"))
        }
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(n: u64) -> DataCollection {
        Builtin::PlainTernary { n }.collection().unwrap()
    }

    #[test]
    fn interval_rules() {
        assert!(Interval::new(0, 3).is_err());
        assert!(Interval::new(5, 3).is_err());
        let empty = Interval::new(1, 0).unwrap();
        assert!(empty.is_empty());
        assert_eq!(Interval::new(3, 7).unwrap().len(), 5);
    }

    #[test]
    fn table_collision_names_pair() {
        let mut dc = plain(2);
        dc.interval_a = Interval::new(1, 2).unwrap();
        dc.f = MapSpec::Table { values: vec![3, 3] };
        let rep = dc.validate();
        assert!(!rep.is_valid());
        let fail = rep.first_failure().unwrap();
        assert!(fail.detail.contains("n = 1 and n = 2"), "{}", fail.detail);
    }

    #[test]
    fn collision_ignores_zero_weights() {
        let mut dc = plain(3);
        dc.interval_a = Interval::new(1, 3).unwrap();
        dc.u = WeightSpec::Table {
            values: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        };
        dc.f = MapSpec::Table { values: vec![1, 1, 2] };
        assert!(dc.validate().is_valid());
    }

    #[test]
    fn norm_violation_names_index() {
        let mut dc = plain(2);
        dc.interval_a = Interval::new(1, 2).unwrap();
        dc.u = WeightSpec::Table {
            values: vec![Complex64::new(0.5, 0.0), Complex64::new(1.5, 0.0)],
        };
        let rep = dc.validate();
        let fail = rep.first_failure().unwrap();
        assert_eq!(fail.name, "u sup-norm <= 1");
        assert!(fail.detail.contains("n = 2"));
        assert!(dc.materialize().is_err());
    }

    #[test]
    fn shifted_primes_support() {
        let s = WeightSpec::ShiftedPrimeIndicator { a: 1 }
            .support(Interval::new(1, 12).unwrap())
            .unwrap();
        let ns: Vec<u64> = s.iter().map(|p| p.n).collect();
        // n + 1 prime
        assert_eq!(ns, vec![1, 2, 4, 6, 10, 12]);
        let s = WeightSpec::ShiftedPrimeIndicator { a: -3 }
            .support(Interval::new(1, 10).unwrap())
            .unwrap();
        let ns: Vec<u64> = s.iter().map(|p| p.n).collect();
        assert_eq!(ns, vec![5, 6, 8, 10]);
    }

    #[test]
    fn nth_prime_map_images() {
        let iv = Interval::new(3, 6).unwrap();
        let img = MapSpec::NthPrime.images(&[3, 4, 6], iv).unwrap();
        assert_eq!(img, vec![5, 7, 13]);
    }

    #[test]
    fn serde_round_trip() {
        let dc = Builtin::QuadraticResidue { m: 11 }.collection().unwrap();
        let json = serde_json::to_string(&dc).unwrap();
        assert!(json.contains("\"interval_n3\":[1,22]"));
        let back: DataCollection = serde_json::from_str(&plain_json()).unwrap();
        assert!(back.wp.is_integer_valued());
    }

    fn plain_json() -> String {
        serde_json::to_string(&plain(6)).unwrap()
    }
}
