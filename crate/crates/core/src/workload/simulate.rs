// SPDX-License-Identifier: Apache-2.0

//! Small random histories from simulated threads, for equivalence testing.
//!
//! Each simulated thread issues its operations one at a time. Calls, effects
//! and returns of different threads are interleaved at random, and every
//! result is computed from a plain sequential model at the effect point, so
//! the generated history is linearizable. A corruption step then optionally
//! alters one recorded result, which usually (not always) breaks that.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::history::{Event, History, OperationRecord, Value};
use crate::specs::{SpecDescriptor, SpecKind};

#[derive(Clone, Copy, Debug)]
pub struct SimParams {
    pub threads: usize,
    pub ops: usize,
    /// Keys (or array indexes) are drawn from `0..keys`.
    pub keys: i64,
    /// Probability of altering one result after generation.
    pub corrupt: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            threads: 3,
            ops: 8,
            keys: 3,
            corrupt: 0.5,
        }
    }
}

enum Model {
    Set(BTreeSet<i64>),
    Map(BTreeMap<i64, i64>),
    Array(Vec<i64>),
}

impl Model {
    fn new(spec: &SpecDescriptor) -> Model {
        match spec.kind() {
            SpecKind::Set => Model::Set(BTreeSet::new()),
            SpecKind::Map => Model::Map(BTreeMap::new()),
            SpecKind::Array { len } => Model::Array(vec![0; len]),
        }
    }

    fn run(&mut self, name: &str, args: &[i64]) -> Value {
        match self {
            Model::Set(s) => Value::Bool(match name {
                "insert" => s.insert(args[0]),
                "remove" => s.remove(&args[0]),
                _ => s.contains(&args[0]),
            }),
            Model::Map(m) => match name {
                "write" => {
                    m.insert(args[0], args[1]);
                    Value::Bool(true)
                }
                _ => m.get(&args[0]).map_or(Value::Absent, |&v| Value::Int(v)),
            },
            Model::Array(a) => match name {
                "write" => {
                    a[args[0] as usize] = args[1];
                    Value::Bool(true)
                }
                _ => Value::Int(a[args[0] as usize]),
            },
        }
    }
}

fn random_op<R: Rng + ?Sized>(rng: &mut R, spec: &SpecDescriptor, keys: i64) -> (String, Vec<i64>) {
    match spec.kind() {
        SpecKind::Set => {
            let name = ["insert", "remove", "contains"][rng.random_range(0..3)];
            (name.into(), vec![rng.random_range(0..keys)])
        }
        SpecKind::Map | SpecKind::Array { .. } => {
            let bound = match spec.kind() {
                SpecKind::Array { len } => (len as i64).min(keys).max(1),
                _ => keys,
            };
            let key = rng.random_range(0..bound);
            if rng.random_bool(0.5) {
                ("write".into(), vec![key, rng.random_range(0..3)])
            } else {
                ("read".into(), vec![key])
            }
        }
    }
}

enum Phase {
    Idle,
    Called { event: usize },
    Applied { event: usize },
}

/// Generates one complete history with `params.ops` operations spread over
/// `params.threads` threads.
pub fn random_history<R: Rng + ?Sized>(rng: &mut R, spec: &SpecDescriptor, params: &SimParams) -> History {
    let threads = params.threads.max(1);
    let mut remaining = vec![0usize; threads];
    for _ in 0..params.ops {
        remaining[rng.random_range(0..threads)] += 1;
    }
    let mut phase: Vec<Phase> = (0..threads).map(|_| Phase::Idle).collect();
    let mut model = Model::new(spec);
    let mut events: Vec<Event> = Vec::with_capacity(params.ops * 2);
    let mut next_id = 0u64;

    loop {
        let ready: Vec<usize> = (0..threads)
            .filter(|&t| !matches!(phase[t], Phase::Idle) || remaining[t] > 0)
            .collect();
        if ready.is_empty() {
            break;
        }
        let t = ready[rng.random_range(0..ready.len())];
        phase[t] = match phase[t] {
            Phase::Idle => {
                remaining[t] -= 1;
                let (name, args) = random_op(rng, spec, params.keys);
                events.push(Event::call(
                    next_id,
                    "obj",
                    OperationRecord::new(name, args, Value::Absent),
                ));
                next_id += 1;
                Phase::Called {
                    event: events.len() - 1,
                }
            }
            Phase::Called { event } => {
                let op = &mut events[event].operation;
                op.result = model.run(&op.name, &op.args);
                Phase::Applied { event }
            }
            Phase::Applied { event } => {
                let call = &events[event];
                events.push(Event::ret(call.id, call.object.clone(), call.operation.clone()));
                Phase::Idle
            }
        };
    }

    if !events.is_empty() && rng.random_bool(params.corrupt) {
        let victim = events[rng.random_range(0..events.len())].id;
        let altered = match events.iter().find(|e| e.id == victim).unwrap().operation.result {
            Value::Bool(b) => Value::Bool(!b),
            Value::Int(_) if spec.kind() == SpecKind::Map && rng.random_bool(0.3) => Value::Absent,
            Value::Int(v) => Value::Int((v + 1) % 3),
            Value::Absent => Value::Int(rng.random_range(0..3)),
        };
        for e in events.iter_mut().filter(|e| e.id == victim) {
            e.operation.result = altered;
        }
    }
    History::new(events)
}
