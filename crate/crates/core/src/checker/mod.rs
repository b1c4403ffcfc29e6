// SPDX-License-Identifier: Apache-2.0

//! Backtracking linearizability search with an optional configuration
//! cache.
//!
//! The search walks the entry list from the head. A call entry whose
//! operation can be applied to the current state, and whose resulting
//! configuration is new, is pushed onto the calls stack and lifted out of the
//! list; the walk restarts at the head. Reaching a return entry means some
//! pending call could not be linearized before it, so the most recent
//! provisional choice is undone and the walk resumes just past it. The
//! history is linearizable once every entry has been lifted.

mod bitset;
mod cache;

use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use bitset::Bitset;
pub use cache::{CacheMode, ConfigCache, Configuration};

use crate::history::{EntryRef, History, HistoryError, HistoryList, Operation};
use crate::specs::{Command, SpecDescriptor, SpecError, SpecState};

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Linearizable,
    NotLinearizable,
    Timeout,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Linearizable => "linearizable",
            Verdict::NotLinearizable => "not linearizable",
            Verdict::Timeout => "timeout",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CheckerOptions {
    pub cache: CacheMode,
    /// Give up after this many loop iterations.
    pub max_iterations: Option<u64>,
    /// Give up after this much wall time.
    pub timeout: Option<Duration>,
    /// Absolute deadline; takes precedence over `timeout`. Lets several
    /// checks share one budget.
    pub deadline: Option<Instant>,
    /// Record the linearization found on success.
    pub witness: bool,
}

impl Default for CheckerOptions {
    fn default() -> Self {
        CheckerOptions {
            cache: CacheMode::Unbounded,
            max_iterations: None,
            timeout: None,
            deadline: None,
            witness: false,
        }
    }
}

impl CheckerOptions {
    pub fn with_cache(cache: CacheMode) -> Self {
        CheckerOptions {
            cache,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckStats {
    pub iterations: u64,
    pub max_stack_height: usize,
    pub cache_insertions: u64,
    pub cache_hits: u64,
    pub evictions: u64,
    pub peak_cache_entries: usize,
    #[serde(rename = "elapsed_seconds", serialize_with = "as_seconds")]
    pub elapsed: Duration,
}

fn as_seconds<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub verdict: Verdict,
    /// Linearization found, when requested and the verdict is positive.
    pub witness: Option<Vec<Operation>>,
    pub stats: CheckStats,
}

/// Provisionally linearized call entries with the state before each.
#[derive(Clone, Debug, Default)]
pub struct CallsStack {
    frames: Vec<(EntryRef, SpecState)>,
}

impl CallsStack {
    pub fn with_capacity(n: usize) -> Self {
        CallsStack {
            frames: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, entry: EntryRef, state: SpecState) {
        self.frames.push((entry, state));
    }

    pub fn pop(&mut self) -> Option<(EntryRef, SpecState)> {
        self.frames.pop()
    }

    pub fn height(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Operations from the bottom of the stack to the top, i.e. in
    /// linearization order.
    pub fn extract_witness(&self, hl: &HistoryList) -> Vec<Operation> {
        self.frames.iter().map(|(e, _)| hl.operation(*e).clone()).collect()
    }
}

const CLOCK_CHECK_INTERVAL: u64 = 1024;

/// Decides whether the history in `hl` is linearizable with respect to
/// `spec`. The list is restored to its initial linkage before returning.
pub fn check(hl: &mut HistoryList, spec: &SpecDescriptor, opts: &CheckerOptions) -> Result<CheckResult, CheckError> {
    let start = Instant::now();
    let deadline = opts.deadline.or_else(|| opts.timeout.map(|t| start + t));
    let commands: Vec<Command> = hl
        .operations()
        .iter()
        .map(|op| spec.compile(&op.record))
        .collect::<Result<_, _>>()?;

    let use_cache = opts.cache != CacheMode::None;
    let mut linearized = Bitset::new(hl.n_calls());
    let mut cache = ConfigCache::new(opts.cache);
    let mut calls = CallsStack::with_capacity(hl.n_calls());
    let mut state = spec.initial_state();
    let mut stats = CheckStats::default();
    #[cfg(debug_assertions)]
    let initial_links = hl.link_snapshot();

    let mut entry = hl.first();
    let verdict = loop {
        if hl.first().is_none() {
            break Verdict::Linearizable;
        }
        stats.iterations += 1;
        if opts.max_iterations.is_some_and(|max| stats.iterations > max) {
            break Verdict::Timeout;
        }
        if stats.iterations % CLOCK_CHECK_INTERVAL == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            break Verdict::Timeout;
        }

        let e = entry.expect("cursor stays on a linked entry while the list is nonempty");
        if hl.is_call(e) {
            let id = hl.entry_id(e);
            let next_state = commands[id].apply(&state);
            let changed = match &next_state {
                None => false,
                Some(_) if !use_cache => true,
                Some(s) => {
                    linearized.toggle(id);
                    let changed = cache.insert(Configuration::new(linearized.clone(), s.clone()));
                    linearized.toggle(id);
                    changed
                }
            };
            if changed {
                let next_state = next_state.expect("changed implies applicable");
                calls.push(e, std::mem::replace(&mut state, next_state));
                linearized.set(id);
                hl.lift(e);
                stats.max_stack_height = stats.max_stack_height.max(calls.height());
                entry = hl.first();
            } else {
                entry = hl.next(e);
            }
        } else {
            let Some((top, prev_state)) = calls.pop() else {
                #[cfg(debug_assertions)]
                debug_assert!(
                    hl.link_snapshot() == initial_links,
                    "every lift is undone when the search fails"
                );
                break Verdict::NotLinearizable;
            };
            state = prev_state;
            linearized.clear(hl.entry_id(top));
            hl.unlift(top);
            entry = hl.next(top);
        }
    };

    debug_assert!(calls.height() <= hl.n_calls());
    debug_assert_eq!(linearized.count_ones(), calls.height());
    let witness = (verdict == Verdict::Linearizable && opts.witness).then(|| calls.extract_witness(hl));
    while let Some((top, _)) = calls.pop() {
        hl.unlift(top);
    }

    stats.cache_insertions = cache.insertions();
    stats.cache_hits = cache.hits();
    stats.evictions = cache.evictions();
    stats.peak_cache_entries = cache.peak_len();
    stats.elapsed = start.elapsed();
    Ok(CheckResult {
        verdict,
        witness,
        stats,
    })
}

/// Links `history` and checks it. The history must be complete.
pub fn check_history(
    history: &History,
    spec: &SpecDescriptor,
    opts: &CheckerOptions,
) -> Result<CheckResult, CheckError> {
    let mut hl = HistoryList::build(history)?;
    check(&mut hl, spec, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{Event, OperationRecord, Value};
    use std::num::NonZeroUsize;

    fn op(name: &str, k: i64, r: bool) -> OperationRecord {
        OperationRecord::new(name, [k], Value::Bool(r))
    }

    fn modes() -> Vec<CacheMode> {
        vec![
            CacheMode::None,
            CacheMode::Unbounded,
            CacheMode::Lru(NonZeroUsize::new(1).unwrap()),
            CacheMode::Lru(NonZeroUsize::new(4).unwrap()),
        ]
    }

    #[test]
    fn empty_history_is_linearizable() {
        for mode in modes() {
            let opts = CheckerOptions {
                witness: true,
                ..CheckerOptions::with_cache(mode)
            };
            let r = check_history(&History::default(), &SpecDescriptor::SET, &opts).unwrap();
            assert_eq!(r.verdict, Verdict::Linearizable);
            assert_eq!(r.witness, Some(vec![]));
        }
    }

    #[test]
    fn concurrent_double_insert_fails() {
        let ins = op("insert", 1, true);
        let h = History::new(vec![
            Event::call(1, "s", ins.clone()),
            Event::call(2, "s", ins.clone()),
            Event::ret(1, "s", ins.clone()),
            Event::ret(2, "s", ins),
        ]);
        for mode in modes() {
            let r = check_history(&h, &SpecDescriptor::SET, &CheckerOptions::with_cache(mode)).unwrap();
            assert_eq!(r.verdict, Verdict::NotLinearizable, "{mode:?}");
        }
    }

    #[test]
    fn single_op_witness() {
        let ins = op("insert", 1, true);
        let h = History::new(vec![Event::call(9, "s", ins.clone()), Event::ret(9, "s", ins.clone())]);
        let opts = CheckerOptions {
            witness: true,
            ..Default::default()
        };
        let r = check_history(&h, &SpecDescriptor::SET, &opts).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].record, ins);
        assert_eq!(w[0].id, 9);
    }

    #[test]
    fn list_is_restored_after_check() {
        let ins = op("insert", 1, true);
        let con = op("contains", 1, true);
        let h = History::new(vec![
            Event::call(1, "s", ins.clone()),
            Event::call(2, "s", con.clone()),
            Event::ret(1, "s", ins),
            Event::ret(2, "s", con),
        ]);
        let mut hl = HistoryList::build(&h).unwrap();
        let before = hl.link_snapshot();
        let r = check(&mut hl, &SpecDescriptor::SET, &CheckerOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Linearizable);
        assert_eq!(hl.link_snapshot(), before);
    }

    #[test]
    fn iteration_budget_yields_timeout() {
        let ins = op("insert", 1, true);
        let h = History::new(vec![Event::call(1, "s", ins.clone()), Event::ret(1, "s", ins)]);
        let opts = CheckerOptions {
            max_iterations: Some(0),
            ..Default::default()
        };
        let r = check_history(&h, &SpecDescriptor::SET, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Timeout);
    }

    #[test]
    fn spec_mismatch_is_an_error() {
        let bad = OperationRecord::new("push", [1], Value::Bool(true));
        let h = History::new(vec![Event::call(1, "s", bad.clone()), Event::ret(1, "s", bad)]);
        assert!(matches!(
            check_history(&h, &SpecDescriptor::SET, &CheckerOptions::default()),
            Err(CheckError::Spec(SpecError::UnknownOperation { .. }))
        ));
    }
}
