/// Fixed-length bit array stored in 64-bit words, least significant bit first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Packs into `ceil(len / 8)` bytes, bit `i` at byte `i / 8`, position `i % 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len.div_ceil(8));
        for (k, w) in self.words.iter().enumerate() {
            for (j, b) in w.to_le_bytes().iter().enumerate() {
                if k * 8 + j < self.len.div_ceil(8) {
                    out.push(*b);
                }
            }
        }
        out
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut set = Self::new(len);
        for (k, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            set.words[k] = u64::from_le_bytes(buf);
        }
        if !len.is_multiple_of(64) {
            if let Some(last) = set.words.last() {
                if last >> (len % 64) != 0 {
                    return None;
                }
            }
        }
        Some(set)
    }
}
