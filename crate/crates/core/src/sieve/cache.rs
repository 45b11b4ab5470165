//! On-disk cache of sieve blocks.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size      | field                                   |
//! |--------|-----------|-----------------------------------------|
//! | 0      | 5         | magic `MUSV1`                           |
//! | 5      | 8         | `lo` (u64)                              |
//! | 13     | 8         | `hi` (u64)                              |
//! | 21     | len       | `mu`, one i8 per entry                  |
//! | ...    | 4 * len   | `tau`, u32 per entry                    |
//! | ...    | 8 * len   | `spf`, u64 per entry                    |
//! | ...    | ⌈len/8⌉   | `is_prime`, bit i at byte i/8, LSB first |
//!
//! with `len = hi - lo + 1`. Files are named `musv1_<lo>_<hi>.bin`.

use super::{sieve_block_with, BitSet, SieveBlock};
use crate::error::{Error, Result};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 5] = b"MUSV1";

pub fn encode(block: &SieveBlock) -> Vec<u8> {
    let len = block.len();
    let mut out = Vec::with_capacity(21 + 13 * len + len.div_ceil(8));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&block.lo().to_le_bytes());
    out.extend_from_slice(&block.hi().to_le_bytes());
    out.extend(block.mu_slice().iter().map(|&m| m as u8));
    for t in block.tau_slice() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for s in block.spf_slice() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out.extend_from_slice(&block.prime_bits().to_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> Result<SieveBlock> {
    let bad = |why: &str| Error::Cache(why.to_string());
    if bytes.len() < 21 || &bytes[..5] != MAGIC {
        return Err(bad("missing MUSV1 header"));
    }
    let lo = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let hi = u64::from_le_bytes(bytes[13..21].try_into().unwrap());
    if lo < 1 || hi < lo {
        return Err(bad("bad interval in header"));
    }
    let len = usize::try_from(hi - lo + 1).map_err(|_| bad("interval too long"))?;
    let expect = 21 + 13 * len + len.div_ceil(8);
    if bytes.len() != expect {
        return Err(bad("length does not match header"));
    }
    let mut at = 21;
    let mu: Vec<i8> = bytes[at..at + len].iter().map(|&b| b as i8).collect();
    at += len;
    let tau: Vec<u32> = bytes[at..at + 4 * len]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    at += 4 * len;
    let spf: Vec<u64> = bytes[at..at + 8 * len]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    at += 8 * len;
    let is_prime = BitSet::from_bytes(len, &bytes[at..]).ok_or_else(|| bad("prime bitmap"))?;
    if mu.iter().any(|m| !(-1..=1).contains(m)) {
        return Err(bad("mu entry outside {-1, 0, 1}"));
    }
    Ok(SieveBlock::from_parts(lo, hi, mu, tau, spf, is_prime))
}

/// Directory-backed cache keyed by `(lo, hi)`.
#[derive(Debug, Clone)]
pub struct SieveCache {
    dir: PathBuf,
    capacity: u64,
}

impl SieveCache {
    pub fn new(dir: impl Into<PathBuf>, capacity: u64) -> Self {
        Self {
            dir: dir.into(),
            capacity,
        }
    }

    pub fn path_for(&self, lo: u64, hi: u64) -> PathBuf {
        self.dir.join(format!("musv1_{lo}_{hi}.bin"))
    }

    /// Returns the cached block, sieving and storing it on a miss.
    pub fn load_or_compute(&self, lo: u64, hi: u64) -> Result<SieveBlock> {
        let path = self.path_for(lo, hi);
        if path.exists() {
            let block = decode(&fs::read(&path)?)?;
            if block.lo() == lo && block.hi() == hi {
                return Ok(block);
            }
        }
        let block = sieve_block_with(lo, hi, self.capacity)?;
        fs::create_dir_all(&self.dir)?;
        write_atomic(&path, &encode(&block))?;
        Ok(block)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::sieve_block;

    #[test]
    fn header_layout() {
        let b = sieve_block(10, 20).unwrap();
        let bytes = encode(&b);
        assert_eq!(&bytes[..5], b"MUSV1");
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 10);
        assert_eq!(u64::from_le_bytes(bytes[13..21].try_into().unwrap()), 20);
        assert_eq!(bytes.len(), 21 + 13 * 11 + 2);
        assert_eq!(decode(&bytes).unwrap(), b);
    }

    #[test]
    fn rejects_truncated() {
        let bytes = encode(&sieve_block(1, 100).unwrap());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(b"MUSV2").is_err());
    }

    #[test]
    fn cache_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SieveCache::new(dir.path(), 1 << 20);
        let a = cache.load_or_compute(100, 5000).unwrap();
        assert!(cache.path_for(100, 5000).exists());
        let b = cache.load_or_compute(100, 5000).unwrap();
        assert_eq!(a, b);
    }
}
