// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::num::NonZeroUsize;

use linchk::history::{History, Operation, Value};
use linchk::specs::SpecKind;
use linchk::workload::simulate::{random_history, SimParams};
use linchk::{
    check_compositional, check_history, CacheMode, CheckerOptions, CompositionalOptions, SpecDescriptor, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Replays `ops` against a plain mutable model, independent of the
/// library's persistent states.
pub fn model_accepts(spec: &SpecDescriptor, ops: &[Operation]) -> bool {
    let mut set = BTreeSet::new();
    let mut map = BTreeMap::new();
    let mut array = match spec.kind() {
        SpecKind::Array { len } => vec![0i64; len],
        _ => Vec::new(),
    };
    for op in ops {
        let r = &op.record;
        let got = match (spec.kind(), r.name.as_str()) {
            (SpecKind::Set, "insert") => Value::Bool(set.insert(r.args[0])),
            (SpecKind::Set, "remove") => Value::Bool(set.remove(&r.args[0])),
            (SpecKind::Set, "contains") => Value::Bool(set.contains(&r.args[0])),
            (SpecKind::Map, "write") => {
                map.insert(r.args[0], r.args[1]);
                Value::Bool(true)
            }
            (SpecKind::Map, "read") => map.get(&r.args[0]).map_or(Value::Absent, |&v| Value::Int(v)),
            (SpecKind::Array { .. }, "write") => {
                array[r.args[0] as usize] = r.args[1];
                Value::Bool(true)
            }
            (SpecKind::Array { .. }, "read") => Value::Int(array[r.args[0] as usize]),
            other => panic!("unexpected operation {other:?}"),
        };
        if got != r.result {
            return false;
        }
    }
    true
}

/// Checks that `witness` is a permutation of the history's operations that
/// respects real-time order and replays successfully.
pub fn validate_witness(history: &History, spec: &SpecDescriptor, witness: &[Operation]) -> Result<(), String> {
    let mut call_pos = HashMap::new();
    let mut ret_pos = HashMap::new();
    for (i, e) in history.events().iter().enumerate() {
        if e.is_call() {
            call_pos.insert(e.id, i);
        } else {
            ret_pos.insert(e.id, i);
        }
    }
    let ids: BTreeSet<u64> = witness.iter().map(|o| o.id).collect();
    if ids.len() != witness.len() || ids != call_pos.keys().copied().collect() {
        return Err("witness is not a permutation of the operations".into());
    }
    for (i, a) in witness.iter().enumerate() {
        for b in &witness[..i] {
            if ret_pos[&a.id] < call_pos[&b.id] {
                return Err(format!(
                    "op {} returns before op {} is called but is ordered after it",
                    a.id, b.id
                ));
            }
        }
    }
    if !model_accepts(spec, witness) {
        return Err("witness does not replay against the specification".into());
    }
    Ok(())
}

pub fn options(cache: CacheMode) -> CheckerOptions {
    CheckerOptions {
        witness: true,
        ..CheckerOptions::with_cache(cache)
    }
}

pub fn lru(capacity: usize) -> CacheMode {
    CacheMode::Lru(NonZeroUsize::new(capacity).unwrap())
}

/// Verdict of every checking configuration, labelled. Positive verdicts are
/// witness-validated on the way.
pub fn all_verdicts(history: &History, spec: &SpecDescriptor, lru_caps: &[usize]) -> Vec<(String, Verdict)> {
    let mut modes = vec![
        ("wg".to_string(), CacheMode::None),
        ("wgl".to_string(), CacheMode::Unbounded),
    ];
    modes.extend(lru_caps.iter().map(|&c| (format!("wgl-lru({c})"), lru(c))));
    let mut out = Vec::new();
    for (label, mode) in modes {
        let r = check_history(history, spec, &options(mode)).unwrap();
        if r.verdict == Verdict::Linearizable {
            validate_witness(history, spec, r.witness.as_deref().unwrap()).unwrap_or_else(|e| panic!("{label}: {e}"));
        }
        if let CacheMode::Lru(cap) = mode {
            assert!(
                r.stats.peak_cache_entries <= cap.get(),
                "{label}: peak {}",
                r.stats.peak_cache_entries
            );
        }
        out.push((label, r.verdict));
    }
    let copts = CompositionalOptions {
        checker: options(CacheMode::Unbounded),
        parallel: Some(1),
    };
    let r = check_compositional(history, spec, &copts).unwrap();
    out.push(("wgl-p".into(), r.verdict));
    out
}

pub const SPECS: [SpecDescriptor; 3] = [SpecDescriptor::SET, SpecDescriptor::MAP, SpecDescriptor::array(3)];

/// A small random history with 2 to 4 threads and at most 12 operations.
pub fn small_history(seed: u64, spec: &SpecDescriptor) -> History {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SimParams {
        threads: rng.random_range(2..=4),
        ops: rng.random_range(1..=12),
        keys: 3,
        corrupt: 0.5,
    };
    random_history(&mut rng, spec, &params)
}
