// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Whether an event starts or finishes an operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Call,
    Return,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Call => "call",
            EventKind::Return => "ret",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of an operation: a boolean, an integer, or the distinguished
/// "absent" value a map read returns for a key that was never written.
///
/// On the wire these are JSON `true`/`false`, integers and `null`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Absent,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Absent => f.write_str("absent"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            Value::Bool(b) => serializer.serialize_bool(b),
            Value::Int(i) => serializer.serialize_i64(i),
            Value::Absent => serializer.serialize_unit(),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl Visitor<'_> for ValueVisitor {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a boolean, a 64-bit integer or null")
            }

            fn visit_bool<E: de::Error>(self, v: bool) -> Result<Value, E> {
                Ok(Value::Bool(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
                Ok(Value::Int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
                i64::try_from(v)
                    .map(Value::Int)
                    .map_err(|_| E::custom(format!("integer {v} out of range")))
            }

            fn visit_unit<E: de::Error>(self) -> Result<Value, E> {
                Ok(Value::Absent)
            }

            fn visit_none<E: de::Error>(self) -> Result<Value, E> {
                Ok(Value::Absent)
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}

/// An operation with its input arguments and eventual result, e.g.
/// `insert(1) : true`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperationRecord {
    pub name: String,
    pub args: Vec<i64>,
    pub result: Value,
}

impl OperationRecord {
    pub fn new(name: impl Into<String>, args: impl Into<Vec<i64>>, result: Value) -> Self {
        OperationRecord {
            name: name.into(),
            args: args.into(),
            result,
        }
    }
}

impl fmt::Display for OperationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ") : {}", self.result)
    }
}

/// One call or return.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub kind: EventKind,
    pub id: u64,
    pub object: String,
    pub operation: OperationRecord,
}

impl Event {
    pub fn call(id: u64, object: impl Into<String>, operation: OperationRecord) -> Self {
        Event {
            kind: EventKind::Call,
            id,
            object: object.into(),
            operation,
        }
    }

    pub fn ret(id: u64, object: impl Into<String>, operation: OperationRecord) -> Self {
        Event {
            kind: EventKind::Return,
            id,
            object: object.into(),
            operation,
        }
    }

    pub fn is_call(&self) -> bool {
        self.kind == EventKind::Call
    }
}

/// A call together with its matching return: the unit that gets linearized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Operation {
    pub id: u64,
    pub object: String,
    pub record: OperationRecord,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.object, self.record)
    }
}

/// A finite sequence of calls and returns, totally ordered by position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct History {
    events: Vec<Event>,
}

impl History {
    pub fn new(events: Vec<Event>) -> Self {
        History { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    /// Number of call events.
    pub fn call_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_call()).count()
    }

    /// Operations in order of their call events.
    pub fn operations(&self) -> Vec<Operation> {
        self.events
            .iter()
            .filter(|e| e.is_call())
            .map(|e| Operation {
                id: e.id,
                object: e.object.clone(),
                record: e.operation.clone(),
            })
            .collect()
    }

    /// `(call position, return position)` for every operation, in call order.
    /// Pending calls get `None` as their return position.
    pub fn intervals(&self) -> Vec<(u64, usize, Option<usize>)> {
        let mut index = std::collections::HashMap::new();
        let mut out = Vec::new();
        for (pos, e) in self.events.iter().enumerate() {
            match e.kind {
                EventKind::Call => {
                    index.insert(e.id, out.len());
                    out.push((e.id, pos, None));
                }
                EventKind::Return => {
                    if let Some(&i) = index.get(&e.id) {
                        out[i].2 = Some(pos);
                    }
                }
            }
        }
        out
    }
}

impl FromIterator<Event> for History {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        History::new(iter.into_iter().collect())
    }
}
