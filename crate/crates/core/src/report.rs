// SPDX-License-Identifier: Apache-2.0

//! Algorithm selection and the JSON check report.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use crate::checker::{self, CacheMode, CheckError, CheckStats, CheckerOptions, Verdict};
use crate::history::{History, Operation, Value};
use crate::partition::{self, CompositionalOptions};
use crate::specs::SpecDescriptor;

pub const SCHEMA_VERSION: u32 = 1;

/// LRU capacity used when none is given.
pub const DEFAULT_LRU_CAPACITY: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Backtracking without a cache.
    Wg,
    /// Backtracking with an unbounded configuration cache.
    Wgl,
    /// Backtracking with an LRU-bounded configuration cache.
    WglLru,
    /// Per-key partitioning, then `Wgl` on every partition.
    WglP,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Wg, Algorithm::Wgl, Algorithm::WglLru, Algorithm::WglP];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Wg => "wg",
            Algorithm::Wgl => "wgl",
            Algorithm::WglLru => "wgl-lru",
            Algorithm::WglP => "wgl-p",
        }
    }

    /// wgl-p for partitionable specifications, wgl otherwise.
    pub fn default_for(spec: &SpecDescriptor) -> Algorithm {
        if spec.partitionable() {
            Algorithm::WglP
        } else {
            Algorithm::Wgl
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected wg, wgl, wgl-lru or wgl-p)"))
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    /// LRU capacity; only meaningful for [`Algorithm::WglLru`].
    pub cache_capacity: Option<NonZeroUsize>,
    pub timeout: Option<Duration>,
    pub witness: bool,
    /// Worker cap for [`Algorithm::WglP`].
    pub parallel: Option<usize>,
}

impl RunOptions {
    pub fn new(algorithm: Algorithm) -> Self {
        RunOptions {
            algorithm,
            cache_capacity: None,
            timeout: None,
            witness: false,
            parallel: None,
        }
    }

    pub fn cache_mode(&self) -> CacheMode {
        match self.algorithm {
            Algorithm::Wg => CacheMode::None,
            Algorithm::Wgl | Algorithm::WglP => CacheMode::Unbounded,
            Algorithm::WglLru => CacheMode::Lru(
                self.cache_capacity
                    .unwrap_or(NonZeroUsize::new(DEFAULT_LRU_CAPACITY).unwrap()),
            ),
        }
    }

    fn checker_options(&self) -> CheckerOptions {
        CheckerOptions {
            cache: self.cache_mode(),
            timeout: self.timeout,
            witness: self.witness,
            ..Default::default()
        }
    }
}

/// One linearized operation in a witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessOp {
    pub id: u64,
    pub obj: String,
    pub op: String,
    pub args: Vec<i64>,
    pub result: Value,
}

impl From<&Operation> for WitnessOp {
    fn from(op: &Operation) -> Self {
        WitnessOp {
            id: op.id,
            obj: op.object.clone(),
            op: op.record.name.clone(),
            args: op.record.args.clone(),
            result: op.record.result,
        }
    }
}

fn witness_of(w: &Option<Vec<Operation>>) -> Option<Vec<WitnessOp>> {
    w.as_ref().map(|ops| ops.iter().map(WitnessOp::from).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub key: i64,
    pub operations: usize,
    pub verdict: Verdict,
    pub stats: CheckStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessOp>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub spec: String,
    pub verdict: Verdict,
    pub operations: usize,
    pub stats: CheckStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessOp>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<PartitionReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_partition_key: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate_partition: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {} ({} operations, {} spec, {:.3}s)",
            self.algorithm,
            self.verdict,
            self.operations,
            self.spec,
            self.stats.elapsed.as_secs_f64()
        );
        if let Some(parts) = &self.partitions {
            out.push_str(&format!("\npartitions: {}", parts.len()));
            if self.degenerate_partition == Some(true) {
                out.push_str(" (degenerate: fewer than two partitions)");
            }
        }
        if let Some(key) = self.failing_partition_key {
            out.push_str(&format!("\nfirst failing partition key: {key}"));
        }
        if let Some(w) = &self.witness {
            out.push_str("\nwitness:");
            for op in w {
                let args: Vec<String> = op.args.iter().map(i64::to_string).collect();
                out.push_str(&format!("\n  {}.{}({}) : {}", op.obj, op.op, args.join(","), op.result));
            }
        }
        if let Some(parts) = &self.partitions {
            for p in parts.iter().filter(|p| p.witness.is_some()) {
                out.push_str(&format!("\nwitness for key {}:", p.key));
                for op in p.witness.as_ref().unwrap() {
                    let args: Vec<String> = op.args.iter().map(i64::to_string).collect();
                    out.push_str(&format!("\n  {}.{}({}) : {}", op.obj, op.op, args.join(","), op.result));
                }
            }
        }
        out
    }
}

/// Checks a complete, validated history with the selected algorithm.
pub fn run(history: &History, spec: &SpecDescriptor, opts: &RunOptions) -> Result<CheckReport, CheckError> {
    let operations = history.call_count();
    let base = CheckReport {
        schema_version: SCHEMA_VERSION,
        algorithm: opts.algorithm,
        spec: spec.name(),
        verdict: Verdict::Linearizable,
        operations,
        stats: CheckStats::default(),
        witness: None,
        partitions: None,
        failing_partition_key: None,
        degenerate_partition: None,
        workers: None,
    };
    if opts.algorithm == Algorithm::WglP {
        let copts = CompositionalOptions {
            checker: opts.checker_options(),
            parallel: opts.parallel,
        };
        let r = partition::check_compositional(history, spec, &copts)?;
        let partitions = r
            .partitions
            .iter()
            .map(|p| PartitionReport {
                key: p.key,
                operations: p.operations,
                verdict: p.result.verdict,
                stats: p.result.stats.clone(),
                witness: witness_of(&p.result.witness),
            })
            .collect();
        Ok(CheckReport {
            verdict: r.verdict,
            stats: r.stats,
            partitions: Some(partitions),
            failing_partition_key: r.failing_key,
            degenerate_partition: Some(r.degenerate),
            workers: Some(r.workers),
            ..base
        })
    } else {
        let r = checker::check_history(history, spec, &opts.checker_options())?;
        Ok(CheckReport {
            verdict: r.verdict,
            stats: r.stats,
            witness: witness_of(&r.witness),
            ..base
        })
    }
}
