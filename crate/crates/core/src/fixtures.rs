// SPDX-License-Identifier: Apache-2.0

//! Small hand-written set histories used by tests and examples.

use crate::history::{Event, History, OperationRecord, Value};

fn set_op(name: &str, key: i64, result: bool) -> OperationRecord {
    OperationRecord::new(name, [key], Value::Bool(result))
}

fn sequential(ops: &[OperationRecord]) -> History {
    ops.iter()
        .enumerate()
        .flat_map(|(i, op)| {
            let id = i as u64 + 1;
            [Event::call(id, "set", op.clone()), Event::ret(id, "set", op.clone())]
        })
        .collect()
}

/// `insert(1) : true` and `remove(1) : false` overlap; both return before
/// `contains(1) : true` is called. Linearizable: remove, insert, contains.
pub fn concurrent_insert_remove() -> History {
    let (ins, rem, con) = (
        set_op("insert", 1, true),
        set_op("remove", 1, false),
        set_op("contains", 1, true),
    );
    History::new(vec![
        Event::call(1, "set", ins.clone()),
        Event::call(2, "set", rem.clone()),
        Event::ret(1, "set", ins),
        Event::ret(2, "set", rem),
        Event::call(3, "set", con.clone()),
        Event::ret(3, "set", con),
    ])
}

/// `remove(1) : false`, `insert(1) : true`, `contains(1) : true` in sequence.
pub fn sequential_remove_insert_contains() -> History {
    sequential(&[
        set_op("remove", 1, false),
        set_op("insert", 1, true),
        set_op("contains", 1, true),
    ])
}

/// `insert(1) : true`, `remove(1) : false`, `contains(1) : true` in
/// sequence. Not a valid set behaviour.
pub fn sequential_insert_remove_contains() -> History {
    sequential(&[
        set_op("insert", 1, true),
        set_op("remove", 1, false),
        set_op("contains", 1, true),
    ])
}

/// Three pairwise-overlapping calls `insert(0) : true`,
/// `contains(0) : true`, `remove(1) : false`, returning in call order.
pub fn three_overlapping() -> History {
    let ops = [
        set_op("insert", 0, true),
        set_op("contains", 0, true),
        set_op("remove", 1, false),
    ];
    let mut events: Vec<Event> = ops
        .iter()
        .enumerate()
        .map(|(i, o)| Event::call(i as u64 + 1, "set", o.clone()))
        .collect();
    events.extend(
        ops.iter()
            .enumerate()
            .map(|(i, o)| Event::ret(i as u64 + 1, "set", o.clone())),
    );
    History::new(events)
}

/// [`three_overlapping`] restricted to `insert(0)` and `remove(1)`.
pub fn two_keys() -> History {
    let (ins, rem) = (set_op("insert", 0, true), set_op("remove", 1, false));
    History::new(vec![
        Event::call(1, "set", ins.clone()),
        Event::call(3, "set", rem.clone()),
        Event::ret(1, "set", ins),
        Event::ret(3, "set", rem),
    ])
}
