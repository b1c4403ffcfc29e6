// SPDX-License-Identifier: Apache-2.0

//! Multi-threaded workload harness: threads issue pseudo-random operations
//! against a shared concurrent set while a recorder logs calls and returns.

mod recorder;
mod sets;
pub mod simulate;
mod violations;

use std::sync::Barrier;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use recorder::{shadow_consistent, InFlight, Recorder, ShadowSpan};
pub use sets::{CoarseLockSet, ConcurrentSet, ImplSelector, NonAtomicSet, StaleReadSet, StripedLockSet};
pub use violations::{make_violation, ViolationKind};

use crate::hashing::mix64;
use crate::history::{History, OperationRecord, Value};

/// Relative weights of insert, remove and contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpMix {
    pub insert: u32,
    pub remove: u32,
    pub contains: u32,
}

impl Default for OpMix {
    fn default() -> Self {
        OpMix {
            insert: 1,
            remove: 1,
            contains: 1,
        }
    }
}

impl OpMix {
    fn total(&self) -> u32 {
        self.insert + self.remove + self.contains
    }
}

#[derive(Clone, Debug)]
pub struct WorkloadConfig {
    pub threads: usize,
    pub ops_per_thread: usize,
    /// Keys are drawn uniformly from `0..key_range`.
    pub key_range: i64,
    pub op_mix: OpMix,
    pub seed: u64,
    pub implementation: ImplSelector,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            threads: 4,
            ops_per_thread: 5_000,
            key_range: 24,
            op_mix: OpMix::default(),
            seed: 0,
            implementation: ImplSelector::CoarseLock,
        }
    }
}

impl WorkloadConfig {
    /// 4 threads × 70 000 operations over 24 keys.
    pub fn full_scale() -> Self {
        WorkloadConfig {
            ops_per_thread: 70_000,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.threads == 0 {
            return Err("threads must be at least 1".into());
        }
        if self.key_range < 1 {
            return Err("key range must be at least 1".into());
        }
        if self.op_mix.total() == 0 {
            return Err("operation mix weights must not all be zero".into());
        }
        Ok(())
    }
}

/// Operation stream of one thread: ChaCha8 seeded with
/// `mix64(seed ^ mix64(thread + 1))`, so streams regenerate identically on
/// every platform. Only the interleaving varies between runs.
pub fn thread_rng(seed: u64, thread: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(thread as u64 + 1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Insert(i64),
    Remove(i64),
    Contains(i64),
}

/// The `count` operations thread `thread` will issue.
pub fn thread_ops(cfg: &WorkloadConfig, thread: usize, count: usize) -> Vec<SetOp> {
    let mut rng = thread_rng(cfg.seed, thread);
    let total = cfg.op_mix.total();
    (0..count)
        .map(|_| {
            let pick = rng.random_range(0..total);
            let key = rng.random_range(0..cfg.key_range);
            if pick < cfg.op_mix.insert {
                SetOp::Insert(key)
            } else if pick < cfg.op_mix.insert + cfg.op_mix.remove {
                SetOp::Remove(key)
            } else {
                SetOp::Contains(key)
            }
        })
        .collect()
}

/// Runs the workload and returns the recorded, complete history of
/// `2 × threads × ops_per_thread` events.
pub fn run_workload(cfg: &WorkloadConfig) -> History {
    run_workload_recorded(cfg).0
}

/// Like [`run_workload`], also returning the recorder's shadow spans.
pub fn run_workload_recorded(cfg: &WorkloadConfig) -> (History, Vec<ShadowSpan>) {
    let set = cfg.implementation.build();
    let recorder = Recorder::with_capacity(2 * cfg.threads * cfg.ops_per_thread);
    let start = Barrier::new(cfg.threads);
    std::thread::scope(|scope| {
        for t in 0..cfg.threads {
            let (set, recorder, start) = (&*set, &recorder, &start);
            let ops = thread_ops(cfg, t, cfg.ops_per_thread);
            scope.spawn(move || {
                start.wait();
                for op in ops {
                    let flight = recorder.begin();
                    let (name, key, result) = match op {
                        SetOp::Insert(k) => ("insert", k, set.insert(k)),
                        SetOp::Remove(k) => ("remove", k, set.remove(k)),
                        SetOp::Contains(k) => ("contains", k, set.contains(k)),
                    };
                    recorder.finish(flight, "set", OperationRecord::new(name, [key], Value::Bool(result)));
                }
            });
        }
    });
    let shadow = recorder.shadow();
    debug_assert!(
        shadow_consistent(&shadow),
        "recorder produced a false happens-before edge"
    );
    (recorder.into_history(), shadow)
}
