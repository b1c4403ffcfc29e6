// SPDX-License-Identifier: Apache-2.0

//! Per-element hash tokens for XOR-accumulated hashes.
//!
//! XOR over 64-bit words forms an abelian group, so a hash defined as the XOR
//! of one token per member can be updated in O(1) when a member is added or
//! removed, regardless of insertion order.

const ELEMENT_SEED: u64 = 0x243f_6a88_85a3_08d3;
const INDEX_SEED: u64 = 0x1319_8a2e_0370_7344;
const PAIR_SEED: u64 = 0xa409_3822_299f_31d0;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Token for a set element.
#[inline]
pub fn element_token(value: i64) -> u64 {
    mix64(value as u64 ^ ELEMENT_SEED)
}

/// Token for a key/value binding (map entries, array cells).
#[inline]
pub fn pair_token(key: i64, value: i64) -> u64 {
    mix64(mix64(key as u64 ^ PAIR_SEED) ^ value as u64)
}

/// Token for bit `index` of a linearized-entry bitset.
#[inline]
pub fn index_token(index: usize) -> u64 {
    mix64(index as u64 ^ INDEX_SEED)
}
