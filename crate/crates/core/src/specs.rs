// SPDX-License-Identifier: Apache-2.0

//! Executable sequential specifications.
//!
//! A specification is replayed operation by operation against a persistent
//! state. Each state carries an XOR-accumulated hash that insert/remove/write
//! update in O(1), so configuration lookups never rehash whole states.

use std::fmt;
use std::str::FromStr;

use im::{OrdMap, OrdSet, Vector};

use crate::hashing::{element_token, pair_token};
use crate::history::{OperationRecord, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("unknown specification {0:?} (expected set, map or array:N)")]
    UnknownSpec(String),
    #[error("operation {op:?} is not declared by the {spec} specification")]
    UnknownOperation { spec: String, op: String },
    #[error("{op}: expected {expected} argument(s), got {got}")]
    Arity { op: String, expected: usize, got: usize },
    #[error("{op}: result {result} has the wrong type")]
    ResultType { op: String, result: Value },
    #[error("{op}: index {index} out of bounds for array of length {len}")]
    IndexOutOfBounds { op: String, index: i64, len: usize },
    #[error("the {0} specification is not partitionable")]
    NotPartitionable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecKind {
    Set,
    Map,
    Array { len: usize },
}

/// Name and argument count of a declared operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpSignature {
    pub name: &'static str,
    pub arity: usize,
}

const SET_OPS: &[OpSignature] = &[
    OpSignature {
        name: "insert",
        arity: 1,
    },
    OpSignature {
        name: "remove",
        arity: 1,
    },
    OpSignature {
        name: "contains",
        arity: 1,
    },
];

const MAP_OPS: &[OpSignature] = &[
    OpSignature {
        name: "write",
        arity: 2,
    },
    OpSignature { name: "read", arity: 1 },
];

/// A sequential data type: which operations exist, their semantics, and
/// whether histories over it split by key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpecDescriptor {
    kind: SpecKind,
}

impl SpecDescriptor {
    pub const SET: SpecDescriptor = SpecDescriptor { kind: SpecKind::Set };
    pub const MAP: SpecDescriptor = SpecDescriptor { kind: SpecKind::Map };

    pub const fn array(len: usize) -> SpecDescriptor {
        SpecDescriptor {
            kind: SpecKind::Array { len },
        }
    }

    pub fn kind(&self) -> SpecKind {
        self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            SpecKind::Set => "set".into(),
            SpecKind::Map => "map".into(),
            SpecKind::Array { len } => format!("array:{len}"),
        }
    }

    pub fn operations(&self) -> &'static [OpSignature] {
        match self.kind {
            SpecKind::Set => SET_OPS,
            SpecKind::Map | SpecKind::Array { .. } => MAP_OPS,
        }
    }

    /// Every supported specification splits by its key or index argument.
    pub fn partitionable(&self) -> bool {
        true
    }

    pub fn initial_state(&self) -> SpecState {
        match self.kind {
            SpecKind::Set => SpecState::Set(SetState::default()),
            SpecKind::Map => SpecState::Map(MapState::default()),
            SpecKind::Array { len } => SpecState::Array(ArrayState::zeros(len)),
        }
    }

    /// Resolves a recorded operation against this specification, checking
    /// name, arity, result type and bounds once so replay can't fail.
    pub fn compile(&self, op: &OperationRecord) -> Result<Command, SpecError> {
        let sig = self
            .operations()
            .iter()
            .find(|s| s.name == op.name)
            .ok_or_else(|| SpecError::UnknownOperation {
                spec: self.name(),
                op: op.name.clone(),
            })?;
        if op.args.len() != sig.arity {
            return Err(SpecError::Arity {
                op: op.name.clone(),
                expected: sig.arity,
                got: op.args.len(),
            });
        }
        let wrong_type = || SpecError::ResultType {
            op: op.name.clone(),
            result: op.result,
        };
        let key = op.args[0];
        let cmd = match (self.kind, sig.name) {
            (SpecKind::Set, name) => {
                let Value::Bool(expect) = op.result else {
                    return Err(wrong_type());
                };
                match name {
                    "insert" => Command::Insert { key, expect },
                    "remove" => Command::Remove { key, expect },
                    _ => Command::Contains { key, expect },
                }
            }
            (SpecKind::Map, "write") => {
                let Value::Bool(expect) = op.result else {
                    return Err(wrong_type());
                };
                Command::MapWrite {
                    key,
                    value: op.args[1],
                    expect,
                }
            }
            (SpecKind::Map, _) => {
                let expect = match op.result {
                    Value::Int(v) => Some(v),
                    Value::Absent => None,
                    Value::Bool(_) => return Err(wrong_type()),
                };
                Command::MapRead { key, expect }
            }
            (SpecKind::Array { len }, name) => {
                let index =
                    usize::try_from(key)
                        .ok()
                        .filter(|&i| i < len)
                        .ok_or_else(|| SpecError::IndexOutOfBounds {
                            op: op.name.clone(),
                            index: key,
                            len,
                        })?;
                if name == "write" {
                    let Value::Bool(expect) = op.result else {
                        return Err(wrong_type());
                    };
                    Command::ArrayWrite {
                        index,
                        value: op.args[1],
                        expect,
                    }
                } else {
                    let Value::Int(expect) = op.result else {
                        return Err(wrong_type());
                    };
                    Command::ArrayRead { index, expect }
                }
            }
        };
        Ok(cmd)
    }

    /// Replays `op` on `state`. Returns whether the recorded result matches
    /// sequential execution, and the post-state (the input state when it
    /// does not match). `state` is never modified.
    pub fn apply(&self, state: &SpecState, op: &OperationRecord) -> Result<(bool, SpecState), SpecError> {
        let cmd = self.compile(op)?;
        Ok(match cmd.apply(state) {
            Some(next) => (true, next),
            None => (false, state.clone()),
        })
    }

    /// The key (set/map) or index (array) an operation touches.
    pub fn partition_key(&self, op: &OperationRecord) -> Result<i64, SpecError> {
        if !self.partitionable() {
            return Err(SpecError::NotPartitionable(self.name()));
        }
        op.args.first().copied().ok_or_else(|| SpecError::Arity {
            op: op.name.clone(),
            expected: 1,
            got: 0,
        })
    }
}

impl fmt::Display for SpecDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SpecDescriptor {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "set" => Ok(SpecDescriptor::SET),
            "map" => Ok(SpecDescriptor::MAP),
            _ => s
                .strip_prefix("array:")
                .and_then(|n| n.parse::<usize>().ok())
                .map(SpecDescriptor::array)
                .ok_or_else(|| SpecError::UnknownSpec(s.to_string())),
        }
    }
}

/// An operation resolved against a specification, with its expected result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Insert { key: i64, expect: bool },
    Remove { key: i64, expect: bool },
    Contains { key: i64, expect: bool },
    MapWrite { key: i64, value: i64, expect: bool },
    MapRead { key: i64, expect: Option<i64> },
    ArrayWrite { index: usize, value: i64, expect: bool },
    ArrayRead { index: usize, expect: i64 },
}

impl Command {
    /// Post-state if the expected result is what sequential execution
    /// produces on `state`, otherwise `None`.
    pub fn apply(&self, state: &SpecState) -> Option<SpecState> {
        match (*self, state) {
            (Command::Insert { key, expect }, SpecState::Set(s)) => {
                let absent = !s.contains(key);
                (absent == expect).then(|| {
                    if absent {
                        SpecState::Set(s.with(key))
                    } else {
                        state.clone()
                    }
                })
            }
            (Command::Remove { key, expect }, SpecState::Set(s)) => {
                let present = s.contains(key);
                (present == expect).then(|| {
                    if present {
                        SpecState::Set(s.without(key))
                    } else {
                        state.clone()
                    }
                })
            }
            (Command::Contains { key, expect }, SpecState::Set(s)) => {
                (s.contains(key) == expect).then(|| state.clone())
            }
            (Command::MapWrite { key, value, expect }, SpecState::Map(m)) => {
                expect.then(|| SpecState::Map(m.with(key, value)))
            }
            (Command::MapRead { key, expect }, SpecState::Map(m)) => (m.get(key) == expect).then(|| state.clone()),
            (Command::ArrayWrite { index, value, expect }, SpecState::Array(a)) => {
                expect.then(|| SpecState::Array(a.with(index, value)))
            }
            (Command::ArrayRead { index, expect }, SpecState::Array(a)) => {
                (a.get(index) == expect).then(|| state.clone())
            }
            (cmd, state) => unreachable!("{cmd:?} applied to mismatched state {state:?}"),
        }
    }
}

/// Persistent set of integers.
#[derive(Clone, Debug, Default)]
pub struct SetState {
    elems: OrdSet<i64>,
    hash: u64,
}

impl SetState {
    pub fn contains(&self, key: i64) -> bool {
        self.elems.contains(&key)
    }

    pub fn with(&self, key: i64) -> SetState {
        let mut elems = self.elems.clone();
        if elems.insert(key).is_some() {
            return self.clone();
        }
        SetState {
            elems,
            hash: self.hash ^ element_token(key),
        }
    }

    pub fn without(&self, key: i64) -> SetState {
        let mut elems = self.elems.clone();
        if elems.remove(&key).is_none() {
            return self.clone();
        }
        SetState {
            elems,
            hash: self.hash ^ element_token(key),
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.elems.iter().copied()
    }
}

impl FromIterator<i64> for SetState {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        iter.into_iter().fold(SetState::default(), |s, k| s.with(k))
    }
}

/// Persistent integer-to-integer map.
#[derive(Clone, Debug, Default)]
pub struct MapState {
    entries: OrdMap<i64, i64>,
    hash: u64,
}

impl MapState {
    pub fn get(&self, key: i64) -> Option<i64> {
        self.entries.get(&key).copied()
    }

    pub fn with(&self, key: i64, value: i64) -> MapState {
        let mut entries = self.entries.clone();
        let mut hash = self.hash ^ pair_token(key, value);
        if let Some(old) = entries.insert(key, value) {
            hash ^= pair_token(key, old);
        }
        MapState { entries, hash }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Persistent fixed-length integer vector.
#[derive(Clone, Debug)]
pub struct ArrayState {
    cells: Vector<i64>,
    hash: u64,
}

impl ArrayState {
    pub fn zeros(len: usize) -> ArrayState {
        let hash = (0..len).fold(0, |h, i| h ^ pair_token(i as i64, 0));
        ArrayState {
            cells: std::iter::repeat_n(0, len).collect(),
            hash,
        }
    }

    pub fn get(&self, index: usize) -> i64 {
        self.cells[index]
    }

    pub fn with(&self, index: usize, value: i64) -> ArrayState {
        let old = self.cells[index];
        ArrayState {
            cells: self.cells.update(index, value),
            hash: self.hash ^ pair_token(index as i64, old) ^ pair_token(index as i64, value),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.cells.iter().copied().collect()
    }
}

/// Immutable state of a sequential data type.
#[derive(Clone, Debug)]
pub enum SpecState {
    Set(SetState),
    Map(MapState),
    Array(ArrayState),
}

impl SpecState {
    /// O(1): the hash is maintained incrementally by every update.
    #[inline]
    pub fn state_hash(&self) -> u64 {
        match self {
            SpecState::Set(s) => s.hash,
            SpecState::Map(m) => m.hash,
            SpecState::Array(a) => a.hash,
        }
    }

    /// Recomputes the hash from the contents.
    pub fn recompute_hash(&self) -> u64 {
        match self {
            SpecState::Set(s) => s.elems.iter().fold(0, |h, &k| h ^ element_token(k)),
            SpecState::Map(m) => m.entries.iter().fold(0, |h, (&k, &v)| h ^ pair_token(k, v)),
            SpecState::Array(a) => a
                .cells
                .iter()
                .enumerate()
                .fold(0, |h, (i, &v)| h ^ pair_token(i as i64, v)),
        }
    }

    pub fn state_equal(&self, other: &SpecState) -> bool {
        if self.state_hash() != other.state_hash() {
            return false;
        }
        match (self, other) {
            (SpecState::Set(a), SpecState::Set(b)) => a.elems == b.elems,
            (SpecState::Map(a), SpecState::Map(b)) => a.entries == b.entries,
            (SpecState::Array(a), SpecState::Array(b)) => a.cells == b.cells,
            _ => false,
        }
    }
}

impl PartialEq for SpecState {
    fn eq(&self, other: &Self) -> bool {
        self.state_equal(other)
    }
}

impl Eq for SpecState {}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_op(name: &str, k: i64, r: bool) -> OperationRecord {
        OperationRecord::new(name, [k], Value::Bool(r))
    }

    #[test]
    fn initial_states() {
        assert!(matches!(SpecDescriptor::SET.initial_state(), SpecState::Set(s) if s.is_empty()));
        match SpecDescriptor::array(4).initial_state() {
            SpecState::Array(a) => assert_eq!(a.to_vec(), vec![0, 0, 0, 0]),
            _ => panic!(),
        }
        match SpecDescriptor::MAP.initial_state() {
            SpecState::Map(m) => assert_eq!(m.get(0), None),
            _ => panic!(),
        }
    }

    #[test]
    fn failed_remove_then_failed_sequence() {
        let spec = SpecDescriptor::SET;
        let s0 = spec.initial_state();
        let (ok, s1) = spec.apply(&s0, &set_op("remove", 1, false)).unwrap();
        assert!(ok);
        assert_eq!(s1, s0);

        let (ok, s1) = spec.apply(&s0, &set_op("insert", 1, true)).unwrap();
        assert!(ok);
        let (ok, s2) = spec.apply(&s1, &set_op("remove", 1, false)).unwrap();
        assert!(!ok);
        assert_eq!(s2, s1);
    }

    #[test]
    fn contains_on_member() {
        let spec = SpecDescriptor::SET;
        let s = SpecState::Set([1].into_iter().collect());
        let (ok, s2) = spec.apply(&s, &set_op("contains", 1, true)).unwrap();
        assert!(ok);
        assert_eq!(s2, s);
    }

    #[test]
    fn array_initial_read() {
        let spec = SpecDescriptor::array(4);
        let s = spec.initial_state();
        let (ok, s2) = spec
            .apply(&s, &OperationRecord::new("read", [2], Value::Int(0)))
            .unwrap();
        assert!(ok);
        assert_eq!(s2, s);
    }

    #[test]
    fn map_read_of_unwritten_key_is_absent() {
        let spec = SpecDescriptor::MAP;
        let s = spec.initial_state();
        let read_absent = OperationRecord::new("read", [5], Value::Absent);
        let read_zero = OperationRecord::new("read", [5], Value::Int(0));
        assert!(spec.apply(&s, &read_absent).unwrap().0);
        assert!(!spec.apply(&s, &read_zero).unwrap().0);
        let (_, s) = spec
            .apply(&s, &OperationRecord::new("write", [5, 0], Value::Bool(true)))
            .unwrap();
        assert!(spec.apply(&s, &read_zero).unwrap().0);
        assert!(!spec.apply(&s, &read_absent).unwrap().0);
    }

    #[test]
    fn errors() {
        let s = SpecDescriptor::SET.initial_state();
        assert!(matches!(
            SpecDescriptor::SET.apply(&s, &set_op("push", 1, true)),
            Err(SpecError::UnknownOperation { .. })
        ));
        let a = SpecDescriptor::array(4);
        assert!(matches!(
            a.apply(&a.initial_state(), &OperationRecord::new("read", [4], Value::Int(0))),
            Err(SpecError::IndexOutOfBounds { index: 4, len: 4, .. })
        ));
        assert!(matches!(
            SpecDescriptor::SET.apply(&s, &OperationRecord::new("insert", [1], Value::Int(1))),
            Err(SpecError::ResultType { .. })
        ));
        assert!("bogus".parse::<SpecDescriptor>().is_err());
        assert_eq!("array:3".parse::<SpecDescriptor>().unwrap(), SpecDescriptor::array(3));
    }

    #[test]
    fn partition_keys() {
        assert_eq!(
            SpecDescriptor::SET.partition_key(&set_op("remove", 1, false)).unwrap(),
            1
        );
        assert_eq!(
            SpecDescriptor::SET.partition_key(&set_op("insert", 0, true)).unwrap(),
            0
        );
        let w = OperationRecord::new("write", [3, 7], Value::Bool(true));
        assert_eq!(SpecDescriptor::array(4).partition_key(&w).unwrap(), 3);
    }

    #[test]
    fn hash_group_properties() {
        let empty = SetState::default();
        assert_eq!(empty.hash ^ element_token(1), empty.with(1).hash);
        assert_eq!(empty.with(1).with(2).hash, empty.with(2).with(1).hash);
        assert_eq!(empty.with(1).without(1).hash, 0);
    }
}
