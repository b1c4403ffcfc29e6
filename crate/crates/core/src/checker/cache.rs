// SPDX-License-Identifier: Apache-2.0

//! Configuration cache: the set of (linearized entries, state) pairs the
//! search has already reached.

use std::collections::HashSet;
use std::hash::{BuildHasherDefault, Hash, Hasher};
use std::num::NonZeroUsize;

use lru::LruCache;

use super::bitset::Bitset;
use crate::hashing::mix64;
use crate::specs::SpecState;

/// A linearized-entry set paired with the state reached after linearizing
/// exactly those entries.
#[derive(Clone, Debug)]
pub struct Configuration {
    linearized: Bitset,
    state: SpecState,
    fingerprint: u64,
}

impl Configuration {
    pub fn new(linearized: Bitset, state: SpecState) -> Self {
        let fingerprint = linearized.hash() ^ mix64(state.state_hash());
        Configuration {
            linearized,
            state,
            fingerprint,
        }
    }

    /// Overrides the fingerprint, to force hash collisions in tests.
    #[doc(hidden)]
    pub fn with_fingerprint(linearized: Bitset, state: SpecState, fingerprint: u64) -> Self {
        Configuration {
            linearized,
            state,
            fingerprint,
        }
    }

    pub fn linearized(&self) -> &Bitset {
        &self.linearized
    }

    pub fn state(&self) -> &SpecState {
        &self.state
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && self.linearized == other.linearized
            && self.state.state_equal(&other.state)
    }
}

impl Eq for Configuration {}

impl Hash for Configuration {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.fingerprint);
    }
}

/// Passes the precomputed fingerprint straight through.
#[derive(Default)]
struct FingerprintHasher(u64);

impl Hasher for FingerprintHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ u64::from(b);
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = n;
    }
}

type FingerprintBuild = BuildHasherDefault<FingerprintHasher>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheMode {
    /// No cache: plain backtracking search.
    None,
    Unbounded,
    /// Bounded, evicting the least recently inserted-or-hit configuration.
    Lru(NonZeroUsize),
}

enum Store {
    Disabled,
    Unbounded(HashSet<Configuration, FingerprintBuild>),
    Lru(LruCache<Configuration, (), FingerprintBuild>),
}

pub struct ConfigCache {
    store: Store,
    hits: u64,
    insertions: u64,
    evictions: u64,
    peak: usize,
}

impl ConfigCache {
    pub fn new(mode: CacheMode) -> Self {
        let store = match mode {
            CacheMode::None => Store::Disabled,
            CacheMode::Unbounded => Store::Unbounded(HashSet::default()),
            CacheMode::Lru(cap) => Store::Lru(LruCache::with_hasher(cap, FingerprintBuild::default())),
        };
        ConfigCache {
            store,
            hits: 0,
            insertions: 0,
            evictions: 0,
            peak: 0,
        }
    }

    /// Adds `cfg`; true iff it was not already present. A disabled cache
    /// always reports a change. In LRU mode a hit refreshes recency and an
    /// insert at capacity evicts the stalest configuration.
    pub fn insert(&mut self, cfg: Configuration) -> bool {
        let changed = match &mut self.store {
            Store::Disabled => return true,
            Store::Unbounded(set) => set.insert(cfg),
            Store::Lru(lru) => {
                if lru.get(&cfg).is_some() {
                    false
                } else {
                    if lru.push(cfg, ()).is_some() {
                        self.evictions += 1;
                    }
                    true
                }
            }
        };
        if changed {
            self.insertions += 1;
            self.peak = self.peak.max(self.len());
        } else {
            self.hits += 1;
        }
        changed
    }

    pub fn contains(&self, cfg: &Configuration) -> bool {
        match &self.store {
            Store::Disabled => false,
            Store::Unbounded(set) => set.contains(cfg),
            Store::Lru(lru) => lru.contains(cfg),
        }
    }

    pub fn len(&self) -> usize {
        match &self.store {
            Store::Disabled => 0,
            Store::Unbounded(set) => set.len(),
            Store::Lru(lru) => lru.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn insertions(&self) -> u64 {
        self.insertions
    }

    pub fn evictions(&self) -> u64 {
        self.evictions
    }

    /// Largest size the cache has reached.
    pub fn peak_len(&self) -> usize {
        self.peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specs::SpecDescriptor;

    fn cfg(bits: &[usize], state: SpecState) -> Configuration {
        let mut b = Bitset::new(8);
        for &i in bits {
            b.toggle(i);
        }
        Configuration::new(b, state)
    }

    #[test]
    fn set_semantics() {
        let s = SpecDescriptor::SET.initial_state();
        let mut c = ConfigCache::new(CacheMode::Unbounded);
        assert!(c.insert(cfg(&[1], s.clone())));
        assert!(!c.insert(cfg(&[1], s.clone())));
        assert_eq!(c.len(), 1);
        assert_eq!(c.hits(), 1);
    }

    #[test]
    fn forced_collision_keeps_both() {
        let spec = SpecDescriptor::SET;
        let a = spec.initial_state();
        let (_, b) = spec
            .apply(
                &a,
                &crate::history::OperationRecord::new("insert", [1], crate::history::Value::Bool(true)),
            )
            .unwrap();
        let mut c = ConfigCache::new(CacheMode::Unbounded);
        let bits = Bitset::new(4);
        assert!(c.insert(Configuration::with_fingerprint(bits.clone(), a, 42)));
        assert!(c.insert(Configuration::with_fingerprint(bits, b, 42)));
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn lru_capacity_one_evicts() {
        let s = SpecDescriptor::SET.initial_state();
        let mut c = ConfigCache::new(CacheMode::Lru(NonZeroUsize::new(1).unwrap()));
        assert!(c.insert(cfg(&[0], s.clone())));
        assert!(c.insert(cfg(&[1], s.clone())));
        assert!(c.insert(cfg(&[0], s.clone())));
        assert_eq!(c.len(), 1);
        assert_eq!(c.evictions(), 2);
        assert_eq!(c.peak_len(), 1);
    }

    #[test]
    fn lru_hit_refreshes_recency() {
        let s = SpecDescriptor::SET.initial_state();
        let mut c = ConfigCache::new(CacheMode::Lru(NonZeroUsize::new(2).unwrap()));
        assert!(c.insert(cfg(&[0], s.clone())));
        assert!(c.insert(cfg(&[1], s.clone())));
        assert!(!c.insert(cfg(&[0], s.clone()))); // refresh A
        assert!(c.insert(cfg(&[2], s.clone()))); // evicts B
        assert!(c.contains(&cfg(&[0], s.clone())));
        assert!(!c.contains(&cfg(&[1], s)));
    }
}
