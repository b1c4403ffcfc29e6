// SPDX-License-Identifier: Apache-2.0

//! Linearizability checking for recorded concurrent histories.
//!
//! A history of calls and returns is checked against an executable
//! sequential specification ([`specs`]) by backtracking search with a
//! configuration cache ([`checker`]). Specifications whose operations on
//! distinct keys are independent can be checked one key at a time
//! ([`partition`]), which is usually much faster. [`oracle`] is a brute-force
//! reference for small inputs and [`workload`] produces histories from real
//! threads.

pub mod bench;
pub mod checker;
pub mod fixtures;
mod hashing;
pub mod history;
pub mod oracle;
pub mod partition;
pub mod report;
pub mod specs;
pub mod workload;

pub use checker::{check, check_history, CacheMode, CheckError, CheckResult, CheckStats, CheckerOptions, Verdict};
pub use history::{Event, EventKind, History, HistoryList, Operation, OperationRecord, PendingPolicy, Value};
pub use partition::{check_compositional, CompositionalOptions, CompositionalResult};
pub use report::{Algorithm, CheckReport, RunOptions};
pub use specs::{SpecDescriptor, SpecState};

#[doc(hidden)]
pub mod tokens {
    pub use crate::hashing::{element_token, index_token, pair_token};
}
