// SPDX-License-Identifier: Apache-2.0

//! Splitting a history into independent per-key sub-histories and checking
//! each one on its own.
//!
//! For a specification whose operations on different keys never influence
//! each other's results (set, map, array), a history is linearizable iff
//! every per-key sub-history is. Sub-histories share nothing, so their checks
//! run in parallel with independent caches.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::checker::{self, CheckError, CheckResult, CheckStats, CheckerOptions, Verdict};
use crate::history::{History, HistoryList, Operation};
use crate::specs::{SpecDescriptor, SpecError};

/// Dense numbering of the raw partition keys occurring in a history.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyMap {
    index: BTreeMap<i64, usize>,
    keys: Vec<i64>,
}

impl KeyMap {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of(&self, key: i64) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn key_at(&self, index: usize) -> i64 {
        self.keys[index]
    }

    pub fn keys(&self) -> &[i64] {
        &self.keys
    }
}

/// Counts distinct partition keys and numbers them `0..n` in ascending key
/// order, so distinct keys never share a partition.
pub fn count_partitions(history: &History, spec: &SpecDescriptor) -> Result<(usize, KeyMap), SpecError> {
    let mut map = KeyMap::default();
    for event in history.events().iter().filter(|e| e.is_call()) {
        let key = spec.partition_key(&event.operation)?;
        map.index.entry(key).or_insert(0);
    }
    for (i, (key, slot)) in map.index.iter_mut().enumerate() {
        *slot = i;
        map.keys.push(*key);
    }
    Ok((map.keys.len(), map))
}

/// Single pass over the entry list that appends every entry to the chain of
/// partition `f(op) mod n`, rewiring `prev`/`next` in place. Each chain hangs
/// off its own sentinel head and is then copied out as a standalone list.
/// Calls and their returns share an operation, hence a partition.
pub fn partition<F>(mut hl: HistoryList, n: usize, f: F) -> Vec<HistoryList>
where
    F: Fn(&Operation) -> usize,
{
    assert!(n >= 1, "partition count must be positive");
    let sentinels: Vec<_> = (0..n).map(|_| hl.add_sentinel()).collect();
    let mut tails = vec![None; n];
    let mut entry = hl.first();
    while let Some(e) = entry {
        let i = f(hl.operation(e)) % n;
        let tail = tails[i].unwrap_or(sentinels[i]);
        hl.set_next(tail, Some(e));
        let next_entry = hl.next(e);
        hl.set_prev(e, Some(tail));
        hl.set_next(e, None);
        tails[i] = Some(e);
        entry = next_entry;
    }
    let head = hl.head();
    hl.set_next(head, None);
    hl.into_chains(&sentinels)
}

/// Sub-histories with the raw key each one covers.
#[derive(Debug)]
pub struct PartitionSet {
    pub subs: Vec<HistoryList>,
    pub keys: Vec<i64>,
}

impl PartitionSet {
    /// Links `history` and splits it by `spec`'s partition key.
    pub fn split(history: &History, spec: &SpecDescriptor) -> Result<PartitionSet, CheckError> {
        let (n, key_map) = count_partitions(history, spec)?;
        let hl = HistoryList::build(history)?;
        if n == 0 {
            return Ok(PartitionSet {
                subs: Vec::new(),
                keys: Vec::new(),
            });
        }
        let subs = partition(hl, n, |op| {
            let key = spec.partition_key(&op.record).expect("keys were counted");
            key_map.index_of(key).expect("every key is numbered")
        });
        Ok(PartitionSet {
            subs,
            keys: key_map.keys,
        })
    }

    pub fn len(&self) -> usize {
        self.subs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct CompositionalOptions {
    pub checker: CheckerOptions,
    /// Upper bound on concurrent sub-checks; `None` uses every available core.
    pub parallel: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PartitionOutcome {
    pub key: i64,
    pub operations: usize,
    pub result: CheckResult,
}

#[derive(Clone, Debug)]
pub struct CompositionalResult {
    pub verdict: Verdict,
    /// Per-partition results in ascending key order.
    pub partitions: Vec<PartitionOutcome>,
    /// Smallest key whose sub-history is not linearizable.
    pub failing_key: Option<i64>,
    /// Fewer than two partitions: the check reduced to a plain one.
    pub degenerate: bool,
    /// Sums over partitions, except `max_stack_height` (maximum) and
    /// `peak_cache_entries` (largest number of entries that could be live
    /// at once given the worker count). `elapsed` is total wall time.
    pub stats: CheckStats,
    pub workers: usize,
}

/// Splits `history` by key and checks every sub-history independently.
pub fn check_compositional(
    history: &History,
    spec: &SpecDescriptor,
    opts: &CompositionalOptions,
) -> Result<CompositionalResult, CheckError> {
    let start = Instant::now();
    let set = PartitionSet::split(history, spec)?;
    let n = set.len();
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    let workers = opts.parallel.unwrap_or(cores).clamp(1, n.max(1));

    let mut sub_opts = opts.checker.clone();
    sub_opts.deadline = opts
        .checker
        .deadline
        .or_else(|| opts.checker.timeout.map(|t| start + t));

    let sizes: Vec<usize> = set.subs.iter().map(|s| s.n_calls()).collect();
    let results = run_all(set.subs, spec, &sub_opts, workers)?;

    let partitions: Vec<PartitionOutcome> = results
        .into_iter()
        .zip(set.keys.iter().zip(sizes))
        .map(|(result, (&key, operations))| PartitionOutcome {
            key,
            operations,
            result,
        })
        .collect();

    let failing_key = partitions
        .iter()
        .find(|p| p.result.verdict == Verdict::NotLinearizable)
        .map(|p| p.key);
    let verdict = if failing_key.is_some() {
        Verdict::NotLinearizable
    } else if partitions.iter().any(|p| p.result.verdict == Verdict::Timeout) {
        Verdict::Timeout
    } else {
        Verdict::Linearizable
    };

    let stats = aggregate(&partitions, workers, start.elapsed());
    Ok(CompositionalResult {
        verdict,
        partitions,
        failing_key,
        degenerate: n < 2,
        stats,
        workers,
    })
}

fn run_all(
    subs: Vec<HistoryList>,
    spec: &SpecDescriptor,
    opts: &CheckerOptions,
    workers: usize,
) -> Result<Vec<CheckResult>, CheckError> {
    let n = subs.len();
    if workers <= 1 {
        return subs
            .into_iter()
            .map(|mut hl| checker::check(&mut hl, spec, opts))
            .collect();
    }

    // Largest sub-histories first.
    let mut queue: Vec<(usize, HistoryList)> = subs.into_iter().enumerate().collect();
    queue.sort_by_key(|(_, hl)| hl.n_calls());
    let queue = Mutex::new(queue);
    let slots: Vec<Mutex<Option<Result<CheckResult, CheckError>>>> = (0..n).map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = queue.lock().expect("queue lock").pop();
                let Some((idx, mut hl)) = job else { break };
                let result = checker::check(&mut hl, spec, opts);
                *slots[idx].lock().expect("slot lock") = Some(result);
            });
        }
    });

    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot lock").expect("every job ran"))
        .collect()
}

fn aggregate(partitions: &[PartitionOutcome], workers: usize, elapsed: Duration) -> CheckStats {
    let mut stats = CheckStats {
        elapsed,
        ..Default::default()
    };
    let mut peaks = Vec::with_capacity(partitions.len());
    for p in partitions {
        let s = &p.result.stats;
        stats.iterations += s.iterations;
        stats.max_stack_height = stats.max_stack_height.max(s.max_stack_height);
        stats.cache_insertions += s.cache_insertions;
        stats.cache_hits += s.cache_hits;
        stats.evictions += s.evictions;
        peaks.push(s.peak_cache_entries);
    }
    peaks.sort_unstable_by(|a, b| b.cmp(a));
    stats.peak_cache_entries = peaks.iter().take(workers).sum();
    stats
}
