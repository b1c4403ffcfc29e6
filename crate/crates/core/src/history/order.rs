// SPDX-License-Identifier: Apache-2.0

//! Happens-before over calls and the interval-order check.

use std::collections::{BTreeMap, BTreeSet};

use super::event::History;

/// Strict partial order over call ids: `(a, b)` means the return of `a`
/// precedes the call of `b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HappensBefore {
    elements: BTreeSet<u64>,
    pairs: BTreeSet<(u64, u64)>,
}

impl HappensBefore {
    /// Derives the relation from a history's event positions. Pending calls
    /// are included as elements but never precede anything.
    pub fn of(history: &History) -> Self {
        let intervals = history.intervals();
        let mut hb = HappensBefore::default();
        for &(id, _, _) in &intervals {
            hb.elements.insert(id);
        }
        for &(a, _, ret_a) in &intervals {
            let Some(ret_a) = ret_a else { continue };
            for &(b, call_b, _) in &intervals {
                if ret_a < call_b {
                    hb.pairs.insert((a, b));
                }
            }
        }
        hb
    }

    /// Builds an arbitrary relation; used to exercise the order checks on
    /// shapes no history can produce.
    pub fn from_pairs(elements: impl IntoIterator<Item = u64>, pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        let mut elements: BTreeSet<_> = elements.into_iter().collect();
        for &(a, b) in &pairs {
            elements.insert(a);
            elements.insert(b);
        }
        HappensBefore { elements, pairs }
    }

    pub fn precedes(&self, a: u64, b: u64) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn concurrent(&self, a: u64, b: u64) -> bool {
        a != b && !self.precedes(a, b) && !self.precedes(b, a)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Restriction to the given elements.
    pub fn restrict(&self, keep: &BTreeSet<u64>) -> HappensBefore {
        HappensBefore {
            elements: self.elements.intersection(keep).copied().collect(),
            pairs: self
                .pairs
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .copied()
                .collect(),
        }
    }

    pub fn is_strict_partial_order(&self) -> bool {
        if self.pairs.iter().any(|(a, b)| a == b) {
            return false;
        }
        let succ = self.successors();
        self.pairs.iter().all(|&(a, b)| {
            succ.get(&b)
                .is_none_or(|cs| cs.iter().all(|c| self.pairs.contains(&(a, *c))))
        })
    }

    /// True iff the order contains no 2+2 suborder, i.e. the predecessor
    /// sets of all elements form a chain under inclusion.
    pub fn is_interval_order(&self) -> bool {
        let mut preds: BTreeMap<u64, BTreeSet<u64>> = self.elements.iter().map(|&e| (e, BTreeSet::new())).collect();
        for &(a, b) in &self.pairs {
            preds.entry(b).or_default().insert(a);
        }
        let mut sets: Vec<&BTreeSet<u64>> = preds.values().collect();
        sets.sort_by_key(|s| s.len());
        sets.windows(2).all(|w| w[0].is_subset(w[1]))
    }

    fn successors(&self) -> BTreeMap<u64, Vec<u64>> {
        let mut succ: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &(a, b) in &self.pairs {
            succ.entry(a).or_default().push(b);
        }
        succ
    }
}
