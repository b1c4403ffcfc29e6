// SPDX-License-Identifier: Apache-2.0

//! Histories of calls and returns: data model, JSONL wire format, validation,
//! and the doubly-linked entry list the checker searches over.

mod event;
mod linked;
mod order;
mod wire;

use std::collections::{HashMap, HashSet};

pub use event::{Event, EventKind, History, Operation, OperationRecord, Value};
pub use linked::{EntryRef, HistoryList, LinkSnapshot};
pub use order::HappensBefore;
pub use wire::{parse_history, parse_history_str, serialize_history, write_history};

/// Histories with more operations than this skip the explicit interval-order
/// check in [`validate`]; the relation is quadratic in size.
pub const INTERVAL_CHECK_LIMIT: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum HistoryError {
    #[error("line {line}: malformed event: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown event kind {kind:?} (expected \"call\" or \"ret\")")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: duplicate {kind} event with id {id}")]
    DuplicateEvent { line: usize, kind: EventKind, id: u64 },
    #[error("return {id} has no earlier matching call")]
    UnmatchedReturn { id: u64 },
    #[error("return {id} differs from its call in object or operation")]
    MismatchedReturn { id: u64 },
    #[error("call {id} is pending (no matching return)")]
    PendingCall { id: u64 },
    #[error("happens-before is not an interval order")]
    NotIntervalOrder,
}

/// What [`validate`] does with calls that never returned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PendingPolicy {
    /// Reject the history.
    #[default]
    Reject,
    /// Remove pending calls.
    Drop,
}

/// Checks that every return matches an earlier call with equal object and
/// operation, handles pending calls per `policy`, and confirms that
/// happens-before is an interval order. Returns the (possibly trimmed)
/// complete history.
pub fn validate(history: History, policy: PendingPolicy) -> Result<History, HistoryError> {
    let mut calls: HashMap<u64, usize> = HashMap::new();
    let mut returned: HashSet<u64> = HashSet::new();
    for (pos, e) in history.events().iter().enumerate() {
        match e.kind {
            EventKind::Call => {
                if calls.insert(e.id, pos).is_some() {
                    return Err(HistoryError::DuplicateEvent {
                        line: pos + 1,
                        kind: e.kind,
                        id: e.id,
                    });
                }
            }
            EventKind::Return => {
                let Some(&call_pos) = calls.get(&e.id) else {
                    return Err(HistoryError::UnmatchedReturn { id: e.id });
                };
                if !returned.insert(e.id) {
                    return Err(HistoryError::DuplicateEvent {
                        line: pos + 1,
                        kind: e.kind,
                        id: e.id,
                    });
                }
                let call = &history.events()[call_pos];
                if call.object != e.object || call.operation != e.operation {
                    return Err(HistoryError::MismatchedReturn { id: e.id });
                }
            }
        }
    }

    let history = if returned.len() == calls.len() {
        history
    } else {
        match policy {
            PendingPolicy::Reject => {
                let id = history
                    .events()
                    .iter()
                    .find(|e| e.is_call() && !returned.contains(&e.id))
                    .map(|e| e.id)
                    .expect("a pending call exists");
                return Err(HistoryError::PendingCall { id });
            }
            PendingPolicy::Drop => history
                .into_events()
                .into_iter()
                .filter(|e| !e.is_call() || returned.contains(&e.id))
                .collect(),
        }
    };

    if calls.len() <= INTERVAL_CHECK_LIMIT && !HappensBefore::of(&history).is_interval_order() {
        return Err(HistoryError::NotIntervalOrder);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(name: &str, k: i64, r: bool) -> OperationRecord {
        OperationRecord::new(name, [k], Value::Bool(r))
    }

    #[test]
    fn drop_removes_pending_call() {
        let h = History::new(vec![
            Event::call(1, "s", op("insert", 1, true)),
            Event::call(2, "s", op("remove", 1, true)),
            Event::ret(1, "s", op("insert", 1, true)),
        ]);
        let v = validate(h.clone(), PendingPolicy::Drop).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.events().iter().all(|e| e.id == 1));
        assert!(matches!(
            validate(h, PendingPolicy::Reject),
            Err(HistoryError::PendingCall { id: 2 })
        ));
    }

    #[test]
    fn return_before_call_is_unmatched() {
        let h = History::new(vec![
            Event::ret(1, "s", op("insert", 1, true)),
            Event::call(1, "s", op("insert", 1, true)),
        ]);
        assert!(matches!(
            validate(h, PendingPolicy::Reject),
            Err(HistoryError::UnmatchedReturn { id: 1 })
        ));
    }

    #[test]
    fn mismatched_operation_rejected() {
        let h = History::new(vec![
            Event::call(1, "s", op("insert", 1, true)),
            Event::ret(1, "s", op("insert", 1, false)),
        ]);
        assert!(matches!(
            validate(h, PendingPolicy::Reject),
            Err(HistoryError::MismatchedReturn { id: 1 })
        ));
        let h = History::new(vec![
            Event::call(1, "s", op("insert", 1, true)),
            Event::ret(1, "t", op("insert", 1, true)),
        ]);
        assert!(matches!(
            validate(h, PendingPolicy::Reject),
            Err(HistoryError::MismatchedReturn { id: 1 })
        ));
    }

    #[test]
    fn duplicate_return_rejected() {
        let h = History::new(vec![
            Event::call(1, "s", op("insert", 1, true)),
            Event::ret(1, "s", op("insert", 1, true)),
            Event::ret(1, "s", op("insert", 1, true)),
        ]);
        assert!(matches!(
            validate(h, PendingPolicy::Reject),
            Err(HistoryError::DuplicateEvent { line: 3, .. })
        ));
    }
}
