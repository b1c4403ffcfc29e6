// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use crate::history::{Event, History, OperationRecord, Value};

/// Small handcrafted non-linearizable set histories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// Two concurrent `insert(1) : true`.
    DoubleInsert,
    /// `insert(1) : true`, then two concurrent `remove(1) : true`.
    LostRemove,
    /// `insert(1) : true` strictly before `contains(1) : false`.
    StaleContains,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 3] = [
        ViolationKind::DoubleInsert,
        ViolationKind::LostRemove,
        ViolationKind::StaleContains,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::DoubleInsert => "double_insert",
            ViolationKind::LostRemove => "lost_remove",
            ViolationKind::StaleContains => "stale_contains",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ViolationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ViolationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown violation {s:?}"))
    }
}

fn set_op(name: &str, key: i64, result: bool) -> OperationRecord {
    OperationRecord::new(name, [key], Value::Bool(result))
}

pub fn make_violation(kind: ViolationKind) -> History {
    let call = |id, op: &OperationRecord| Event::call(id, "set", op.clone());
    let ret = |id, op: &OperationRecord| Event::ret(id, "set", op.clone());
    match kind {
        ViolationKind::DoubleInsert => {
            let ins = set_op("insert", 1, true);
            History::new(vec![call(1, &ins), call(2, &ins), ret(1, &ins), ret(2, &ins)])
        }
        ViolationKind::LostRemove => {
            let ins = set_op("insert", 1, true);
            let rem = set_op("remove", 1, true);
            History::new(vec![
                call(1, &ins),
                ret(1, &ins),
                call(2, &rem),
                call(3, &rem),
                ret(2, &rem),
                ret(3, &rem),
            ])
        }
        ViolationKind::StaleContains => {
            let ins = set_op("insert", 1, true);
            let con = set_op("contains", 1, false);
            History::new(vec![call(1, &ins), ret(1, &ins), call(2, &con), ret(2, &con)])
        }
    }
}
