//! JSON run-config for user-defined collections.
//!
//! ```json
//! {
//!   "intervals": {"a": [1, 40], "b": [1, 40], "n3": [1, 80]},
//!   "wp": "-n",
//!   "u": {"generator": "mobius"},
//!   "v": {"generator": "table", "csv": "v.csv"},
//!   "f": {"generator": "affine", "s": 1, "t": 0},
//!   "g": {"generator": "identity"},
//!   "m": 0
//! }
//! ```
//!
//! Table CSV files hold `index,value` or `index,re,im` rows; a header row is
//! skipped, missing indices are zero. Relative paths are resolved against
//! the directory of the config file.

use super::{DataCollection, Interval, MapSpec, WeightSpec};
use crate::bracket::{rem_bracket, BracketExpr, EvalGuardConfig};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalsConfig {
    pub a: Interval,
    pub b: Interval,
    pub n3: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionConfig {
    pub intervals: IntervalsConfig,
    /// Bracket polynomial in the DSL; declared integer-valued.
    pub wp: String,
    /// When set, `wp` is replaced by its remainder modulo this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wp_rem: Option<u64>,
    /// Negate `wp` after the optional remainder.
    #[serde(default)]
    pub wp_negate: bool,
    pub u: WeightConfig,
    pub v: WeightConfig,
    pub f: MapConfig,
    pub g: MapConfig,
    #[serde(default)]
    pub m: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<EvalGuardConfig>,
}

impl CollectionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<DataCollection> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)?.into_collection(path.parent())
    }

    pub fn into_collection(self, base: Option<&Path>) -> Result<DataCollection> {
        let mut wp = BracketExpr::parse(&self.wp)?.declare_integer_valued();
        if let Some(m) = self.wp_rem {
            wp = rem_bracket(&wp, m)?;
        }
        if self.wp_negate {
            wp = wp.negated();
        }
        let iv = &self.intervals;
        Ok(DataCollection {
            interval_a: iv.a,
            interval_b: iv.b,
            interval_n3: iv.n3,
            wp,
            u: weight_spec(&self.u, iv.a, base)?,
            v: weight_spec(&self.v, iv.b, base)?,
            f: map_spec(&self.f, iv.a, base)?,
            g: map_spec(&self.g, iv.b, base)?,
            target_m: self.m,
            guard: self.guard.unwrap_or_default(),
        })
    }
}

fn resolve(p: &Path, base: Option<&Path>) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn weight_spec(c: &WeightConfig, iv: Interval, base: Option<&Path>) -> Result<WeightSpec> {
    Ok(match c.generator.to_ascii_lowercase().as_str() {
        "ones" => WeightSpec::Ones,
        "mobius" => WeightSpec::Mobius,
        "mobius_squared" => WeightSpec::MobiusSquared,
        "prime_indicator" => WeightSpec::PrimeIndicator,
        "shifted_prime_indicator" => WeightSpec::ShiftedPrimeIndicator {
            a: c.a.ok_or_else(|| Error::Config("shifted_prime_indicator needs `a`".into()))?,
        },
        "table" => WeightSpec::Table {
            values: match (&c.values, &c.csv) {
                (Some(v), None) => v.clone(),
                (None, Some(p)) => read_weight_csv(&resolve(p, base), iv)?,
                _ => return Err(Error::Config("table weight needs exactly one of `values`, `csv`".into())),
            },
        },
        other => return Err(Error::Config(format!("unknown weight generator `{other}`"))),
    })
}

fn map_spec(c: &MapConfig, iv: Interval, base: Option<&Path>) -> Result<MapSpec> {
    Ok(match c.generator.to_ascii_lowercase().as_str() {
        "identity" => MapSpec::Identity,
        "affine" => {
            let s = c.s.ok_or_else(|| Error::Config("affine map needs `s`".into()))?;
            if s == 0 {
                return Err(Error::Config("affine map needs s != 0".into()));
            }
            MapSpec::Affine {
                s,
                t: c.t.unwrap_or(0),
            }
        }
        "nth_prime" => MapSpec::NthPrime,
        "table" => MapSpec::Table {
            values: match (&c.values, &c.csv) {
                (Some(v), None) => v.clone(),
                (None, Some(p)) => read_map_csv(&resolve(p, base), iv)?,
                _ => return Err(Error::Config("table map needs exactly one of `values`, `csv`".into())),
            },
        },
        other => return Err(Error::Config(format!("unknown map generator `{other}`"))),
    })
}

fn csv_rows(path: &Path) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let Some(first) = rec.get(0) else { continue };
        match first.parse::<u64>() {
            Ok(idx) => out.push((idx, rec.iter().skip(1).map(str::to_string).collect())),
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(Error::Config(format!(
                    "{}: row {} has a non-integer index `{first}`",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    Ok(out)
}

fn slot(path: &Path, iv: Interval, idx: u64) -> Result<usize> {
    if !iv.contains(idx) {
        return Err(Error::Config(format!(
            "{}: index {idx} outside [{}, {}]",
            path.display(),
            iv.lo(),
            iv.hi()
        )));
    }
    Ok((idx - iv.lo()) as usize)
}

fn num<T: std::str::FromStr>(path: &Path, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Config(format!("{}: cannot parse `{s}`", path.display())))
}

pub(crate) fn read_weight_csv(path: &Path, iv: Interval) -> Result<Vec<Complex64>> {
    let mut values = vec![Complex64::new(0.0, 0.0); iv.len() as usize];
    for (idx, rest) in csv_rows(path)? {
        let z = match rest.as_slice() {
            [re] => Complex64::new(num(path, re)?, 0.0),
            [re, im] => Complex64::new(num(path, re)?, num(path, im)?),
            _ => return Err(Error::Config(format!("{}: expected index,value or index,re,im", path.display()))),
        };
        values[slot(path, iv, idx)?] = z;
    }
    Ok(values)
}

pub(crate) fn read_map_csv(path: &Path, iv: Interval) -> Result<Vec<i64>> {
    let mut values = vec![0i64; iv.len() as usize];
    let mut seen = vec![false; iv.len() as usize];
    for (idx, rest) in csv_rows(path)? {
        let [v] = rest.as_slice() else {
            return Err(Error::Config(format!("{}: expected index,value", path.display())));
        };
        let k = slot(path, iv, idx)?;
        values[k] = num(path, v)?;
        seen[k] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::Config(format!(
            "{}: no value for index {}",
            path.display(),
            iv.lo() + k as u64
        )));
    }
    Ok(values)
}
