//! Fixed-length bitsets backed by `u64` words.
//!
//! Columns of a pooling matrix and test outcomes are stored this way; the
//! disjunctness kernels reduce to AND-NOT popcounts over these words.
//! Unused bits of the last word are kept zero so popcounts need no masking.

/// A fixed-length bit vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitVec {
    len: u64,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: u64) -> Self {
        let nwords = (len as usize).div_ceil(64);
        Self {
            len,
            words: vec![0; nwords],
        }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, idx: u64) -> bool {
        assert!(idx < self.len);
        self.words[(idx / 64) as usize] >> (idx % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: u64) {
        assert!(idx < self.len);
        self.words[(idx / 64) as usize] |= 1 << (idx % 64);
    }

    #[inline]
    pub fn flip(&mut self, idx: u64) {
        assert!(idx < self.len);
        self.words[(idx / 64) as usize] ^= 1 << (idx % 64);
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `self |= other`. Lengths must match.
    pub fn or_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Overwrites `self` with `other` without reallocating. Lengths must match.
    pub fn copy_from(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        self.words.copy_from_slice(&other.words);
    }

    /// Clears all bits.
    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Popcount of `self & !mask`. Lengths must match.
    #[inline]
    pub fn andnot_count(&self, mask: &BitVec) -> u64 {
        debug_assert_eq!(self.len, mask.len);
        self.words
            .iter()
            .zip(&mask.words)
            .map(|(a, b)| (a & !b).count_ones() as u64)
            .sum()
    }

    /// Indices of set bits in `self & !mask`, at most `cap` of them, ascending.
    pub fn andnot_positions(&self, mask: &BitVec, cap: usize) -> Vec<u64> {
        assert_eq!(self.len, mask.len);
        let mut out = Vec::new();
        'outer: for (wi, (a, b)) in self.words.iter().zip(&mask.words).enumerate() {
            let mut w = a & !b;
            while w != 0 {
                if out.len() == cap {
                    break 'outer;
                }
                let bit = w.trailing_zeros() as u64;
                out.push(wi as u64 * 64 + bit);
                w &= w - 1;
            }
        }
        out
    }

    /// Indices of all set bits, ascending.
    pub fn ones(&self) -> Vec<u64> {
        self.andnot_positions(&BitVec::zeros(self.len), usize::MAX)
    }

    pub fn hamming(&self, other: &BitVec) -> u64 {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }

    /// Serializes to `ceil(len/8)` bytes: bit `r` goes to byte `r/8`,
    /// bit position `r mod 8`, bit 0 least significant.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = (self.len as usize).div_ceil(8);
        let mut out = vec![0u8; nbytes];
        for (i, byte) in out.iter_mut().enumerate() {
            let word = self.words[i / 8];
            *byte = (word >> (8 * (i % 8))) as u8;
        }
        out
    }

    /// Inverse of [`BitVec::to_bytes`]. Returns `None` if the byte count is
    /// wrong or a bit beyond `len` is set.
    pub fn from_bytes(len: u64, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != (len as usize).div_ceil(8) {
            return None;
        }
        let mut v = BitVec::zeros(len);
        for (i, &byte) in bytes.iter().enumerate() {
            v.words[i / 8] |= (byte as u64) << (8 * (i % 8));
        }
        // Reject payloads with ghost bits past the declared length.
        let tail_bits = len % 8;
        if tail_bits != 0 {
            let last = *bytes.last().unwrap();
            if last >> tail_bits != 0 {
                return None;
            }
        }
        Some(v)
    }
}
