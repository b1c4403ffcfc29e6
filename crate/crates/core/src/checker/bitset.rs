// SPDX-License-Identifier: Apache-2.0

use crate::hashing::index_token;

/// Fixed-size bit vector whose hash is the XOR of one token per set bit,
/// maintained in O(1) per toggle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
    hash: u64,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
            len,
            hash: 0,
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
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
        self.hash ^= index_token(i);
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        if !self.get(i) {
            self.toggle(i);
        }
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        if self.get(i) {
            self.toggle(i);
        }
    }

    #[inline]
    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    /// XOR fold over the set bits, computed from scratch.
    pub fn recompute_hash(&self) -> u64 {
        self.ones().fold(0, |h, i| h ^ index_token(i))
    }
}
