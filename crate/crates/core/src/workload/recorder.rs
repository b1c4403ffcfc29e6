// SPDX-License-Identifier: Apache-2.0

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::OnceLock;

use crate::history::{Event, History, OperationRecord};

/// Append-only event log shared by all worker threads.
///
/// Positions come from a single atomic cursor, so the log has one total
/// order. A call's position is reserved before the operation runs and its
/// return's position after it returns; both records are written once the
/// result is known. If one operation's return precedes another's call in the
/// log, the first operation finished before the second started.
pub struct Recorder {
    slots: Vec<OnceLock<Event>>,
    cursor: AtomicUsize,
    next_id: AtomicU64,
    clock: AtomicU64,
    #[cfg(debug_assertions)]
    shadow: std::sync::Mutex<Vec<ShadowSpan>>,
}

/// Logical-clock readings taken right after an operation's call slot was
/// reserved and right before its return slot was.
#[derive(Clone, Copy, Debug)]
pub struct ShadowSpan {
    pub call_slot: usize,
    pub ret_slot: usize,
    pub start_tick: u64,
    pub end_tick: u64,
}

/// An operation between its call and its return.
pub struct InFlight {
    call_slot: usize,
    id: u64,
    start_tick: u64,
}

impl Recorder {
    pub fn with_capacity(events: usize) -> Self {
        Recorder {
            slots: (0..events).map(|_| OnceLock::new()).collect(),
            cursor: AtomicUsize::new(0),
            next_id: AtomicU64::new(1),
            clock: AtomicU64::new(0),
            #[cfg(debug_assertions)]
            shadow: std::sync::Mutex::new(Vec::new()),
        }
    }

    /// Reserves the call's position. Must happen before the operation runs.
    pub fn begin(&self) -> InFlight {
        let call_slot = self.cursor.fetch_add(1, Ordering::SeqCst);
        assert!(call_slot < self.slots.len(), "recorder capacity exceeded");
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let start_tick = self.clock.fetch_add(1, Ordering::SeqCst);
        InFlight {
            call_slot,
            id,
            start_tick,
        }
    }

    /// Reserves the return's position and writes both events. Must happen
    /// after the operation returned.
    pub fn finish(&self, op: InFlight, object: &str, record: OperationRecord) {
        let end_tick = self.clock.fetch_add(1, Ordering::SeqCst);
        let ret_slot = self.cursor.fetch_add(1, Ordering::SeqCst);
        assert!(ret_slot < self.slots.len(), "recorder capacity exceeded");
        let call = Event::call(op.id, object, record.clone());
        let ret = Event::ret(op.id, object, record);
        self.slots[op.call_slot].set(call).expect("slot written once");
        self.slots[ret_slot].set(ret).expect("slot written once");
        #[cfg(debug_assertions)]
        self.shadow.lock().unwrap().push(ShadowSpan {
            call_slot: op.call_slot,
            ret_slot,
            start_tick: op.start_tick,
            end_tick,
        });
        #[cfg(not(debug_assertions))]
        let _ = (op.start_tick, end_tick);
    }

    /// Shadow spans recorded in debug builds; empty otherwise.
    pub fn shadow(&self) -> Vec<ShadowSpan> {
        #[cfg(debug_assertions)]
        return self.shadow.lock().unwrap().clone();
        #[cfg(not(debug_assertions))]
        Vec::new()
    }

    /// Collects the log. Every reserved slot must have been written, i.e. all
    /// operations finished.
    pub fn into_history(self) -> History {
        let used = self.cursor.load(Ordering::SeqCst);
        self.slots
            .into_iter()
            .take(used)
            .map(|slot| slot.into_inner().expect("operation still in flight"))
            .collect()
    }
}

/// True iff whenever one span's return slot precedes another's call slot,
/// the first span's end tick is below the second's start tick.
pub fn shadow_consistent(spans: &[ShadowSpan]) -> bool {
    enum Mark {
        Ret(u64),
        Call(u64),
    }
    let mut marks: Vec<(usize, Mark)> = Vec::with_capacity(spans.len() * 2);
    for s in spans {
        marks.push((s.call_slot, Mark::Call(s.start_tick)));
        marks.push((s.ret_slot, Mark::Ret(s.end_tick)));
    }
    marks.sort_by_key(|(slot, _)| *slot);
    let mut latest_end: Option<u64> = None;
    for (_, mark) in marks {
        match mark {
            Mark::Ret(end) => latest_end = Some(latest_end.map_or(end, |m| m.max(end))),
            Mark::Call(start) => {
                if latest_end.is_some_and(|m| m >= start) {
                    return false;
                }
            }
        }
    }
    true
}
