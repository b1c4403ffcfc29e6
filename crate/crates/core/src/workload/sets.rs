// SPDX-License-Identifier: Apache-2.0

//! Concurrent integer sets to drive the harness with. Two are correct; two
//! have deliberate races.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

pub trait ConcurrentSet: Send + Sync {
    fn insert(&self, key: i64) -> bool;
    fn remove(&self, key: i64) -> bool;
    fn contains(&self, key: i64) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImplSelector {
    /// One mutex around a hash set.
    CoarseLock,
    /// Keys hashed onto independently locked stripes.
    StripedLock,
    /// insert/remove test membership and update under separate lock
    /// acquisitions.
    NonAtomic,
    /// contains reads a snapshot refreshed only every few writes.
    StaleRead,
}

impl ImplSelector {
    pub const ALL: [ImplSelector; 4] = [
        ImplSelector::CoarseLock,
        ImplSelector::StripedLock,
        ImplSelector::NonAtomic,
        ImplSelector::StaleRead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ImplSelector::CoarseLock => "coarse",
            ImplSelector::StripedLock => "striped",
            ImplSelector::NonAtomic => "nonatomic",
            ImplSelector::StaleRead => "stale",
        }
    }

    pub fn is_correct(self) -> bool {
        matches!(self, ImplSelector::CoarseLock | ImplSelector::StripedLock)
    }

    pub fn build(self) -> Box<dyn ConcurrentSet> {
        match self {
            ImplSelector::CoarseLock => Box::new(CoarseLockSet::default()),
            ImplSelector::StripedLock => Box::new(StripedLockSet::new(16)),
            ImplSelector::NonAtomic => Box::new(NonAtomicSet::default()),
            ImplSelector::StaleRead => Box::new(StaleReadSet::new(8)),
        }
    }
}

impl fmt::Display for ImplSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ImplSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ImplSelector::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| format!("unknown implementation {s:?} (expected coarse, striped, nonatomic or stale)"))
    }
}

#[derive(Default)]
pub struct CoarseLockSet {
    inner: Mutex<HashSet<i64>>,
}

impl ConcurrentSet for CoarseLockSet {
    fn insert(&self, key: i64) -> bool {
        self.inner.lock().unwrap().insert(key)
    }

    fn remove(&self, key: i64) -> bool {
        self.inner.lock().unwrap().remove(&key)
    }

    fn contains(&self, key: i64) -> bool {
        self.inner.lock().unwrap().contains(&key)
    }
}

pub struct StripedLockSet {
    stripes: Vec<Mutex<HashSet<i64>>>,
}

impl StripedLockSet {
    pub fn new(stripes: usize) -> Self {
        StripedLockSet {
            stripes: (0..stripes.max(1)).map(|_| Mutex::default()).collect(),
        }
    }

    fn stripe(&self, key: i64) -> &Mutex<HashSet<i64>> {
        &self.stripes[key.rem_euclid(self.stripes.len() as i64) as usize]
    }
}

impl ConcurrentSet for StripedLockSet {
    fn insert(&self, key: i64) -> bool {
        self.stripe(key).lock().unwrap().insert(key)
    }

    fn remove(&self, key: i64) -> bool {
        self.stripe(key).lock().unwrap().remove(&key)
    }

    fn contains(&self, key: i64) -> bool {
        self.stripe(key).lock().unwrap().contains(&key)
    }
}

#[derive(Default)]
pub struct NonAtomicSet {
    inner: Mutex<HashSet<i64>>,
}

impl ConcurrentSet for NonAtomicSet {
    fn insert(&self, key: i64) -> bool {
        let present = self.inner.lock().unwrap().contains(&key);
        std::thread::yield_now();
        self.inner.lock().unwrap().insert(key);
        !present
    }

    fn remove(&self, key: i64) -> bool {
        let present = self.inner.lock().unwrap().contains(&key);
        std::thread::yield_now();
        self.inner.lock().unwrap().remove(&key);
        present
    }

    fn contains(&self, key: i64) -> bool {
        self.inner.lock().unwrap().contains(&key)
    }
}

pub struct StaleReadSet {
    inner: Mutex<HashSet<i64>>,
    snapshot: Mutex<Arc<HashSet<i64>>>,
    writes: AtomicU64,
    refresh_every: u64,
}

impl StaleReadSet {
    pub fn new(refresh_every: u64) -> Self {
        StaleReadSet {
            inner: Mutex::default(),
            snapshot: Mutex::default(),
            writes: AtomicU64::new(0),
            refresh_every: refresh_every.max(1),
        }
    }

    fn wrote(&self, set: &HashSet<i64>) {
        if self
            .writes
            .fetch_add(1, Ordering::Relaxed)
            .is_multiple_of(self.refresh_every)
        {
            *self.snapshot.lock().unwrap() = Arc::new(set.clone());
        }
    }
}

impl ConcurrentSet for StaleReadSet {
    fn insert(&self, key: i64) -> bool {
        let mut set = self.inner.lock().unwrap();
        let added = set.insert(key);
        self.wrote(&set);
        added
    }

    fn remove(&self, key: i64) -> bool {
        let mut set = self.inner.lock().unwrap();
        let removed = set.remove(&key);
        self.wrote(&set);
        removed
    }

    fn contains(&self, key: i64) -> bool {
        let snap = self.snapshot.lock().unwrap().clone();
        snap.contains(&key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_behaviour_of_correct_sets() {
        for sel in [
            ImplSelector::CoarseLock,
            ImplSelector::StripedLock,
            ImplSelector::NonAtomic,
        ] {
            let s = sel.build();
            assert!(s.insert(3), "{sel}");
            assert!(!s.insert(3));
            assert!(s.contains(3));
            assert!(s.remove(3));
            assert!(!s.remove(3));
            assert!(!s.contains(-3));
        }
    }

    #[test]
    fn stale_read_lags() {
        let s = StaleReadSet::new(4);
        s.insert(1); // refreshes on the first write
        s.insert(2);
        assert!(s.contains(1));
        assert!(!s.contains(2));
    }

    #[test]
    fn selector_round_trip() {
        for sel in ImplSelector::ALL {
            assert_eq!(sel.name().parse::<ImplSelector>().unwrap(), sel);
        }
        assert!("tbb".parse::<ImplSelector>().is_err());
    }
}
