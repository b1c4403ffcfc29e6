// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference procedure for small histories.
//!
//! Enumerates every total order of the operations that extends
//! happens-before, replaying each against the specification. It shares no
//! code with the checker beyond the specification itself, and serves as
//! ground truth in tests.

use std::ops::ControlFlow;

use crate::history::{History, Operation};
use crate::specs::{SpecDescriptor, SpecError, SpecState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_operations: usize,
    /// Upper bound on search nodes visited.
    pub max_enumerations: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_operations: 12,
            max_enumerations: 50_000_000,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("history has {ops} operations; oracle budget allows {max}")]
    TooManyOperations { ops: usize, max: usize },
    #[error("enumeration budget of {0} search nodes exhausted")]
    EnumerationBudget(u64),
    #[error("call {0} has no matching return")]
    Incomplete(u64),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// Operations with happens-before predecessors as bitmasks.
struct Order {
    ops: Vec<Operation>,
    preds: Vec<u64>,
}

impl Order {
    fn of(history: &History, budget: &OracleBudget) -> Result<Order, OracleError> {
        let intervals = history.intervals();
        let max = budget.max_operations.min(64);
        if intervals.len() > max {
            return Err(OracleError::TooManyOperations {
                ops: intervals.len(),
                max,
            });
        }
        let mut ret_pos = Vec::with_capacity(intervals.len());
        for &(id, _, ret) in &intervals {
            ret_pos.push(ret.ok_or(OracleError::Incomplete(id))?);
        }
        let preds = intervals
            .iter()
            .map(|&(_, call, _)| {
                ret_pos
                    .iter()
                    .enumerate()
                    .filter(|&(_, &r)| r < call)
                    .fold(0u64, |m, (j, _)| m | 1 << j)
            })
            .collect();
        Ok(Order {
            ops: history.operations(),
            preds,
        })
    }

    fn full(&self) -> u64 {
        if self.ops.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.ops.len()) - 1
        }
    }

    fn available(&self, chosen: u64) -> impl Iterator<Item = usize> + '_ {
        (0..self.ops.len()).filter(move |&i| chosen >> i & 1 == 0 && self.preds[i] & !chosen == 0)
    }
}

struct Walk<'a, F> {
    order: &'a Order,
    budget: u64,
    visited: u64,
    prefix: Vec<usize>,
    visit: F,
}

impl<F: FnMut(&[usize]) -> ControlFlow<()>> Walk<'_, F> {
    fn go(&mut self, chosen: u64) -> Result<ControlFlow<()>, OracleError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(OracleError::EnumerationBudget(self.budget));
        }
        if chosen == self.order.full() {
            return Ok((self.visit)(&self.prefix));
        }
        let next: Vec<usize> = self.order.available(chosen).collect();
        for i in next {
            self.prefix.push(i);
            let flow = self.go(chosen | 1 << i)?;
            self.prefix.pop();
            if flow.is_break() {
                return Ok(flow);
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// Calls `visit` with every linearization (as indices into
/// [`History::operations`]) until it breaks.
pub fn for_each_linearization<F>(history: &History, budget: &OracleBudget, visit: F) -> Result<(), OracleError>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let order = Order::of(history, budget)?;
    let mut walk = Walk {
        order: &order,
        budget: budget.max_enumerations,
        visited: 0,
        prefix: Vec::new(),
        visit,
    };
    let _ = walk.go(0)?;
    Ok(())
}

/// Every total order on the history's operations that extends
/// happens-before, each exactly once.
pub fn enumerate_linearizations(history: &History, budget: &OracleBudget) -> Result<Vec<Vec<Operation>>, OracleError> {
    let ops = history.operations();
    let mut out = Vec::new();
    for_each_linearization(history, budget, |seq| {
        out.push(seq.iter().map(|&i| ops[i].clone()).collect());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn count_linearizations(history: &History, budget: &OracleBudget) -> Result<u64, OracleError> {
    let mut n = 0;
    for_each_linearization(history, budget, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// True iff some linearization replays with every recorded result matching.
/// Orders sharing a failing prefix are abandoned at the failing step.
pub fn brute_force_check(history: &History, spec: &SpecDescriptor, budget: &OracleBudget) -> Result<bool, OracleError> {
    Ok(brute_force_witness(history, spec, budget)?.is_some())
}

/// Like [`brute_force_check`], also returning the first valid order found.
pub fn brute_force_witness(
    history: &History,
    spec: &SpecDescriptor,
    budget: &OracleBudget,
) -> Result<Option<Vec<Operation>>, OracleError> {
    let order = Order::of(history, budget)?;
    for op in &order.ops {
        spec.compile(&op.record)?;
    }
    let mut search = Replay {
        order: &order,
        spec,
        budget: budget.max_enumerations,
        visited: 0,
        prefix: Vec::new(),
    };
    let found = search.go(0, &spec.initial_state())?;
    Ok(found.then(|| search.prefix.iter().map(|&i| order.ops[i].clone()).collect()))
}

struct Replay<'a> {
    order: &'a Order,
    spec: &'a SpecDescriptor,
    budget: u64,
    visited: u64,
    prefix: Vec<usize>,
}

impl Replay<'_> {
    fn go(&mut self, chosen: u64, state: &SpecState) -> Result<bool, OracleError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(OracleError::EnumerationBudget(self.budget));
        }
        if chosen == self.order.full() {
            return Ok(true);
        }
        let next: Vec<usize> = self.order.available(chosen).collect();
        for i in next {
            let (ok, after) = self.spec.apply(state, &self.order.ops[i].record)?;
            if !ok {
                continue;
            }
            self.prefix.push(i);
            if self.go(chosen | 1 << i, &after)? {
                return Ok(true);
            }
            self.prefix.pop();
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{Event, OperationRecord, Value};

    fn op(name: &str, k: i64, r: bool) -> OperationRecord {
        OperationRecord::new(name, [k], Value::Bool(r))
    }

    fn sequential(ops: &[OperationRecord]) -> History {
        ops.iter()
            .enumerate()
            .flat_map(|(i, o)| {
                [
                    Event::call(i as u64, "s", o.clone()),
                    Event::ret(i as u64, "s", o.clone()),
                ]
            })
            .collect()
    }

    #[test]
    fn sequential_history_has_one_order() {
        let h = sequential(&[op("insert", 1, true), op("remove", 1, true), op("contains", 1, false)]);
        assert_eq!(count_linearizations(&h, &OracleBudget::default()).unwrap(), 1);
    }

    #[test]
    fn pairwise_concurrent_ops_have_all_orders() {
        let ops = [op("insert", 1, true), op("insert", 2, true), op("insert", 3, true)];
        let mut events: Vec<Event> = ops
            .iter()
            .enumerate()
            .map(|(i, o)| Event::call(i as u64, "s", o.clone()))
            .collect();
        events.extend(
            ops.iter()
                .enumerate()
                .map(|(i, o)| Event::ret(i as u64, "s", o.clone())),
        );
        let h = History::new(events);
        assert_eq!(enumerate_linearizations(&h, &OracleBudget::default()).unwrap().len(), 6);
    }

    #[test]
    fn budget_enforced() {
        let ops: Vec<_> = (0..13).map(|k| op("insert", k, true)).collect();
        let h = sequential(&ops);
        assert!(matches!(
            brute_force_check(&h, &SpecDescriptor::SET, &OracleBudget::default()),
            Err(OracleError::TooManyOperations { ops: 13, max: 12 })
        ));
        let tiny = OracleBudget {
            max_operations: 12,
            max_enumerations: 2,
        };
        let h = sequential(&ops[..3]);
        assert!(matches!(
            count_linearizations(&h, &tiny),
            Err(OracleError::EnumerationBudget(2))
        ));
    }

    #[test]
    fn pending_call_rejected() {
        let h = History::new(vec![Event::call(1, "s", op("insert", 1, true))]);
        assert!(matches!(
            brute_force_check(&h, &SpecDescriptor::SET, &OracleBudget::default()),
            Err(OracleError::Incomplete(1))
        ));
    }
}
