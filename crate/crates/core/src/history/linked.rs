// SPDX-License-Identifier: Apache-2.0

//! Arena-backed doubly-linked list of history entries.
//!
//! Node 0 is a sentinel head whose `next` is the first real entry. A node is
//! a call entry exactly when its `matching` link is set. Calls and their
//! returns share an `entry_id` in `[0, n_calls)`, assigned in call order.

use std::collections::HashMap;

use super::event::{Event, EventKind, History, Operation};
use super::HistoryError;

/// Handle to one entry of a [`HistoryList`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryRef(u32);

impl EntryRef {
    pub const HEAD: EntryRef = EntryRef(0);

    #[inline]
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
struct EntryNode {
    prev: Option<EntryRef>,
    next: Option<EntryRef>,
    matching: Option<EntryRef>,
    entry_id: u32,
}

impl EntryNode {
    fn sentinel() -> Self {
        EntryNode {
            prev: None,
            next: None,
            matching: None,
            entry_id: u32::MAX,
        }
    }
}

/// `(prev, next)` of every node, for pointer-graph comparisons.
pub type LinkSnapshot = Vec<(Option<EntryRef>, Option<EntryRef>)>;

#[derive(Clone, Debug)]
pub struct HistoryList {
    nodes: Vec<EntryNode>,
    ops: Vec<Operation>,
    link_writes: u64,
}

impl HistoryList {
    /// Links a complete history. Fails on returns without an earlier call and
    /// on pending calls; run [`super::validate`] first for full diagnostics.
    pub fn build(history: &History) -> Result<HistoryList, HistoryError> {
        let mut nodes = Vec::with_capacity(history.len() + 1);
        nodes.push(EntryNode::sentinel());
        let mut ops = Vec::with_capacity(history.len() / 2);
        let mut open: HashMap<u64, EntryRef> = HashMap::new();

        for (pos, event) in history.events().iter().enumerate() {
            let this = EntryRef(pos as u32 + 1);
            let prev = EntryRef(pos as u32);
            nodes[prev.idx()].next = Some(this);
            let entry_id = match event.kind {
                EventKind::Call => {
                    if open.insert(event.id, this).is_some() {
                        return Err(HistoryError::DuplicateEvent {
                            line: pos + 1,
                            kind: event.kind,
                            id: event.id,
                        });
                    }
                    ops.push(Operation {
                        id: event.id,
                        object: event.object.clone(),
                        record: event.operation.clone(),
                    });
                    (ops.len() - 1) as u32
                }
                EventKind::Return => {
                    let call = open
                        .remove(&event.id)
                        .ok_or(HistoryError::UnmatchedReturn { id: event.id })?;
                    nodes[call.idx()].matching = Some(this);
                    nodes[call.idx()].entry_id
                }
            };
            nodes.push(EntryNode {
                prev: Some(prev),
                next: None,
                matching: None,
                entry_id,
            });
        }
        if let Some((&id, _)) = open.iter().min_by_key(|(_, r)| **r) {
            return Err(HistoryError::PendingCall { id });
        }
        Ok(HistoryList {
            nodes,
            ops,
            link_writes: 0,
        })
    }

    pub fn head(&self) -> EntryRef {
        EntryRef::HEAD
    }

    /// First entry, or `None` once every entry has been lifted.
    #[inline]
    pub fn first(&self) -> Option<EntryRef> {
        self.nodes[0].next
    }

    #[inline]
    pub fn next(&self, e: EntryRef) -> Option<EntryRef> {
        self.nodes[e.idx()].next
    }

    #[inline]
    pub fn prev(&self, e: EntryRef) -> Option<EntryRef> {
        self.nodes[e.idx()].prev
    }

    #[inline]
    pub fn matching(&self, e: EntryRef) -> Option<EntryRef> {
        self.nodes[e.idx()].matching
    }

    #[inline]
    pub fn is_call(&self, e: EntryRef) -> bool {
        self.nodes[e.idx()].matching.is_some()
    }

    #[inline]
    pub fn entry_id(&self, e: EntryRef) -> usize {
        debug_assert!(e != EntryRef::HEAD, "sentinel has no entry id");
        self.nodes[e.idx()].entry_id as usize
    }

    /// The operation of a call or return entry.
    #[inline]
    pub fn operation(&self, e: EntryRef) -> &Operation {
        &self.ops[self.entry_id(e)]
    }

    /// Operations indexed by entry id.
    pub fn operations(&self) -> &[Operation] {
        &self.ops
    }

    /// Number of call entries (`N`).
    pub fn n_calls(&self) -> usize {
        self.ops.len()
    }

    /// Walks forward from the head.
    pub fn iter(&self) -> impl Iterator<Item = EntryRef> + '_ {
        std::iter::successors(self.first(), move |&e| self.next(e))
    }

    /// Number of entries currently reachable from the head.
    pub fn reachable_len(&self) -> usize {
        self.iter().count()
    }

    /// Removes a call entry and its matching return from the list. The
    /// removed nodes keep their own links, which is what lets [`Self::unlift`]
    /// restore them.
    pub fn lift(&mut self, entry: EntryRef) {
        let node = &self.nodes[entry.idx()];
        let (prev, next, matching) = (node.prev, node.next, node.matching);
        debug_assert!(matching.is_some(), "lift on a return entry");
        let prev = prev.expect("linked entry has a predecessor");
        let next = next.expect("call entry is followed by its return");
        let matching = matching.expect("call entry");

        self.nodes[prev.idx()].next = Some(next);
        self.nodes[next.idx()].prev = Some(prev);
        let m = &self.nodes[matching.idx()];
        let (m_prev, m_next) = (m.prev.expect("return has a predecessor"), m.next);
        self.nodes[m_prev.idx()].next = m_next;
        self.link_writes += 3;
        if let Some(m_next) = m_next {
            self.nodes[m_next.idx()].prev = Some(m_prev);
            self.link_writes += 1;
        }
    }

    /// Reverses the most recent [`Self::lift`] of `entry`. Lifts must be
    /// undone in LIFO order.
    pub fn unlift(&mut self, entry: EntryRef) {
        let matching = self.nodes[entry.idx()].matching.expect("call entry");
        let m = &self.nodes[matching.idx()];
        let (m_prev, m_next) = (m.prev.expect("return has a predecessor"), m.next);
        self.nodes[m_prev.idx()].next = Some(matching);
        self.link_writes += 1;
        if let Some(m_next) = m_next {
            self.nodes[m_next.idx()].prev = Some(matching);
            self.link_writes += 1;
        }
        let node = &self.nodes[entry.idx()];
        let (prev, next) = (node.prev.expect("predecessor"), node.next.expect("successor"));
        self.nodes[prev.idx()].next = Some(entry);
        self.nodes[next.idx()].prev = Some(entry);
        self.link_writes += 2;
    }

    /// Total number of link fields written by lift/unlift so far.
    pub fn link_writes(&self) -> u64 {
        self.link_writes
    }

    pub fn link_snapshot(&self) -> LinkSnapshot {
        self.nodes.iter().map(|n| (n.prev, n.next)).collect()
    }

    /// The events currently reachable from the head, as a history.
    pub fn to_history(&self) -> History {
        self.iter()
            .map(|e| {
                let op = self.operation(e);
                let kind = if self.is_call(e) {
                    EventKind::Call
                } else {
                    EventKind::Return
                };
                Event {
                    kind,
                    id: op.id,
                    object: op.object.clone(),
                    operation: op.record.clone(),
                }
            })
            .collect()
    }

    // --- partition support -------------------------------------------------

    pub(crate) fn add_sentinel(&mut self) -> EntryRef {
        self.nodes.push(EntryNode::sentinel());
        EntryRef((self.nodes.len() - 1) as u32)
    }

    pub(crate) fn set_next(&mut self, e: EntryRef, next: Option<EntryRef>) {
        self.nodes[e.idx()].next = next;
    }

    pub(crate) fn set_prev(&mut self, e: EntryRef, prev: Option<EntryRef>) {
        self.nodes[e.idx()].prev = prev;
    }

    /// Splits the list into one standalone list per chain hanging off
    /// `sentinels`, with dense entry ids and chain order preserved. Chains
    /// must be disjoint and keep every call with its return.
    pub(crate) fn into_chains(self, sentinels: &[EntryRef]) -> Vec<HistoryList> {
        const UNSET: u32 = u32::MAX;
        let mut remap = vec![UNSET; self.nodes.len()];
        let mut ids = vec![UNSET; self.ops.len()];
        let mut ops: Vec<Option<Operation>> = self.ops.into_iter().map(Some).collect();
        let old = &self.nodes;

        sentinels
            .iter()
            .map(|&sentinel| {
                let mut nodes = vec![EntryNode::sentinel()];
                let mut chain_ops = Vec::new();
                let mut cur = old[sentinel.idx()].next;
                while let Some(e) = cur {
                    let this = nodes.len() as u32;
                    nodes[this as usize - 1].next = Some(EntryRef(this));
                    remap[e.idx()] = this;
                    let old_id = old[e.idx()].entry_id as usize;
                    if ids[old_id] == UNSET {
                        ids[old_id] = chain_ops.len() as u32;
                        chain_ops.push(ops[old_id].take().expect("each operation belongs to one chain"));
                    }
                    nodes.push(EntryNode {
                        prev: Some(EntryRef(this - 1)),
                        next: None,
                        matching: old[e.idx()].matching,
                        entry_id: ids[old_id],
                    });
                    cur = old[e.idx()].next;
                }
                for node in nodes.iter_mut().skip(1) {
                    if let Some(m) = node.matching {
                        let r = remap[m.idx()];
                        assert!(r != UNSET, "matching return lives in the same chain");
                        node.matching = Some(EntryRef(r));
                    }
                }
                HistoryList {
                    nodes,
                    ops: chain_ops,
                    link_writes: 0,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{OperationRecord, Value};

    fn set_op(name: &str, k: i64, r: bool) -> OperationRecord {
        OperationRecord::new(name, [k], Value::Bool(r))
    }

    /// Three overlapping calls: insert(0), contains(0), remove(1).
    fn three_overlapping_calls() -> History {
        let ops = [
            set_op("insert", 0, true),
            set_op("contains", 0, true),
            set_op("remove", 1, false),
        ];
        History::new(vec![
            Event::call(1, "set", ops[0].clone()),
            Event::call(2, "set", ops[1].clone()),
            Event::call(3, "set", ops[2].clone()),
            Event::ret(1, "set", ops[0].clone()),
            Event::ret(2, "set", ops[1].clone()),
            Event::ret(3, "set", ops[2].clone()),
        ])
    }

    #[test]
    fn lift_and_unlift_relink_neighbours() {
        let mut hl = HistoryList::build(&three_overlapping_calls()).unwrap();
        let refs: Vec<_> = hl.iter().collect();
        let (call1, call2, call3) = (refs[0], refs[1], refs[2]);
        let ret2 = refs[4];
        assert_eq!(hl.prev(call2), Some(call1));
        assert_eq!(hl.next(call2), Some(call3));
        assert_eq!(hl.matching(call2), Some(ret2));

        let before = hl.link_snapshot();
        hl.lift(call2);
        let ids: Vec<u64> = hl.iter().map(|e| hl.operation(e).id).collect();
        assert_eq!(ids, vec![1, 3, 1, 3]);
        // lifted nodes keep their fields
        assert_eq!(hl.prev(call2), Some(call1));
        assert_eq!(hl.next(call2), Some(call3));
        assert!(hl.link_writes() <= 6);

        hl.unlift(call2);
        assert_eq!(hl.link_snapshot(), before);
        assert!(hl.link_writes() <= 12);
    }

    #[test]
    fn lift_only_operation_empties_list() {
        let op = set_op("insert", 1, true);
        let h = History::new(vec![Event::call(7, "s", op.clone()), Event::ret(7, "s", op)]);
        let mut hl = HistoryList::build(&h).unwrap();
        let first = hl.first().unwrap();
        hl.lift(first);
        assert_eq!(hl.first(), None);
        hl.unlift(first);
        assert_eq!(hl.first(), Some(first));
        assert_eq!(hl.reachable_len(), 2);
    }

    #[test]
    fn empty_history_has_empty_list() {
        let hl = HistoryList::build(&History::default()).unwrap();
        assert_eq!(hl.first(), None);
        assert_eq!(hl.n_calls(), 0);
    }

    #[test]
    fn entry_ids_follow_call_order() {
        let hl = HistoryList::build(&three_overlapping_calls()).unwrap();
        let ids: Vec<usize> = hl.iter().map(|e| hl.entry_id(e)).collect();
        assert_eq!(ids, vec![0, 1, 2, 0, 1, 2]);
        assert_eq!(hl.to_history(), three_overlapping_calls());
    }
}
