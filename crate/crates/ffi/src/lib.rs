// SPDX-License-Identifier: Apache-2.0

//! C ABI over the `linchk` checker.
//!
//! Histories and reports are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`LinchkStatus`]; on
//! failure [`linchk_last_error`] describes the problem. Strings handed out
//! by the library are released with [`linchk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::num::NonZeroUsize;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use linchk::history::{parse_history_str, serialize_history, validate, History, PendingPolicy};
use linchk::oracle::{self, OracleBudget};
use linchk::report::{self, Algorithm, CheckReport, RunOptions};
use linchk::workload::{run_workload, ImplSelector, WorkloadConfig};
use linchk::{SpecDescriptor, Verdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinchkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// The history text is not valid JSONL or does not pair up.
    InvalidHistory = 3,
    /// Unknown specification, or operations it does not accept.
    SpecError = 4,
    InvalidArgument = 5,
    /// The history is too large for the brute-force oracle.
    OracleLimit = 6,
    Internal = 7,
}

/// Numbered like the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinchkVerdict {
    Linearizable = 0,
    NotLinearizable = 1,
    Timeout = 3,
}

impl From<Verdict> for LinchkVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Linearizable => LinchkVerdict::Linearizable,
            Verdict::NotLinearizable => LinchkVerdict::NotLinearizable,
            Verdict::Timeout => LinchkVerdict::Timeout,
        }
    }
}

/// A validated, complete history.
pub struct LinchkHistory {
    inner: History,
}

/// The outcome of one check.
pub struct LinchkReport {
    inner: CheckReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(LinchkStatus, String);

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LinchkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LinchkStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal error: panic inside linchk");
            LinchkStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(LinchkStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LinchkStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(LinchkStatus::NullArgument, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(LinchkStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn spec_arg(s: &str) -> Result<SpecDescriptor, Failure> {
    s.parse()
        .map_err(|e: linchk::specs::SpecError| Failure(LinchkStatus::SpecError, e.to_string()))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON contains no NUL").into_raw()
}

/// Message for the most recent failed call on this thread, or null. Valid
/// until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn linchk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn linchk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates `len` bytes of JSONL. Calls without a return are
/// rejected when `drop_pending` is false and discarded otherwise.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linchk_history_parse(
    data: *const u8,
    len: usize,
    drop_pending: bool,
    out: *mut *mut LinchkHistory,
) -> LinchkStatus {
    guard(|| {
        out_arg(out, "out")?;
        if data.is_null() && len > 0 {
            return Err(Failure(LinchkStatus::NullArgument, "data is null".into()));
        }
        let bytes = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(data, len)
        };
        let text =
            std::str::from_utf8(bytes).map_err(|e| Failure(LinchkStatus::InvalidUtf8, format!("history: {e}")))?;
        let policy = if drop_pending {
            PendingPolicy::Drop
        } else {
            PendingPolicy::Reject
        };
        let history = parse_history_str(text)
            .and_then(|h| validate(h, policy))
            .map_err(|e| Failure(LinchkStatus::InvalidHistory, e.to_string()))?;
        *out = Box::into_raw(Box::new(LinchkHistory { inner: history }));
        Ok(())
    })
}

/// Records a history from a multi-threaded set workload. `implementation`
/// is one of `coarse`, `striped`, `nonatomic` or `stale`.
///
/// # Safety
/// `implementation` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn linchk_history_generate(
    threads: usize,
    ops_per_thread: usize,
    key_range: i64,
    implementation: *const c_char,
    seed: u64,
    out: *mut *mut LinchkHistory,
) -> LinchkStatus {
    guard(|| {
        out_arg(out, "out")?;
        let implementation: ImplSelector = str_arg(implementation, "implementation")?
            .parse()
            .map_err(|e| Failure(LinchkStatus::InvalidArgument, e))?;
        let cfg = WorkloadConfig {
            threads,
            ops_per_thread,
            key_range,
            seed,
            implementation,
            ..WorkloadConfig::default()
        };
        cfg.validate().map_err(|e| Failure(LinchkStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(LinchkHistory {
            inner: run_workload(&cfg),
        }));
        Ok(())
    })
}

/// # Safety
/// `history` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linchk_history_free(history: *mut LinchkHistory) {
    if !history.is_null() {
        drop(Box::from_raw(history));
    }
}

/// Number of operations, or 0 for a null handle.
///
/// # Safety
/// `history` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn linchk_history_operations(history: *const LinchkHistory) -> usize {
    history.as_ref().map_or(0, |h| h.inner.call_count())
}

/// Canonical JSONL text of the history; free with [`linchk_string_free`].
///
/// # Safety
/// `history` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn linchk_history_to_jsonl(history: *const LinchkHistory, out: *mut *mut c_char) -> LinchkStatus {
    guard(|| {
        out_arg(out, "out")?;
        let h = ref_arg(history, "history")?;
        let text = String::from_utf8(serialize_history(&h.inner)).expect("serializer emits UTF-8");
        *out = into_c_string(text);
        Ok(())
    })
}

/// Checks `history` against `spec` (`set`, `map` or `array:N`) with
/// `algorithm` (`wg`, `wgl`, `wgl-lru`, `wgl-p`, or null for the default).
/// `cache_capacity` applies to `wgl-lru` only and 0 selects the default.
/// `timeout_ms` of 0 means no limit. `parallel` caps `wgl-p` workers, 0 for
/// all cores.
///
/// # Safety
/// Pointers must be valid as described; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linchk_check(
    history: *const LinchkHistory,
    spec: *const c_char,
    algorithm: *const c_char,
    cache_capacity: usize,
    timeout_ms: u64,
    parallel: usize,
    witness: bool,
    out: *mut *mut LinchkReport,
) -> LinchkStatus {
    guard(|| {
        out_arg(out, "out")?;
        let h = ref_arg(history, "history")?;
        let spec = spec_arg(str_arg(spec, "spec")?)?;
        let algorithm = if algorithm.is_null() {
            Algorithm::default_for(&spec)
        } else {
            str_arg(algorithm, "algorithm")?
                .parse()
                .map_err(|e| Failure(LinchkStatus::InvalidArgument, e))?
        };
        if cache_capacity != 0 && algorithm != Algorithm::WglLru {
            return Err(Failure(
                LinchkStatus::InvalidArgument,
                format!("cache_capacity only applies to wgl-lru (got {algorithm})"),
            ));
        }
        if parallel != 0 && algorithm != Algorithm::WglP {
            return Err(Failure(
                LinchkStatus::InvalidArgument,
                format!("parallel only applies to wgl-p (got {algorithm})"),
            ));
        }
        let opts = RunOptions {
            cache_capacity: NonZeroUsize::new(cache_capacity),
            timeout: (timeout_ms > 0).then(|| Duration::from_millis(timeout_ms)),
            witness,
            parallel: (parallel > 0).then_some(parallel),
            ..RunOptions::new(algorithm)
        };
        let report =
            report::run(&h.inner, &spec, &opts).map_err(|e| Failure(LinchkStatus::SpecError, e.to_string()))?;
        *out = Box::into_raw(Box::new(LinchkReport { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn linchk_report_verdict(report: *const LinchkReport, out: *mut LinchkVerdict) -> LinchkStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ref_arg(report, "report")?.inner.verdict.into();
        Ok(())
    })
}

/// The report as JSON; free with [`linchk_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn linchk_report_json(report: *const LinchkReport, out: *mut *mut c_char) -> LinchkStatus {
    guard(|| {
        out_arg(out, "out")?;
        let r = ref_arg(report, "report")?;
        *out = into_c_string(r.inner.to_json());
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn linchk_report_free(report: *mut LinchkReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Brute-force check of a small history. Fails with
/// [`LinchkStatus::OracleLimit`] above `max_operations` operations.
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linchk_oracle_check(
    history: *const LinchkHistory,
    spec: *const c_char,
    max_operations: usize,
    out: *mut LinchkVerdict,
) -> LinchkStatus {
    guard(|| {
        out_arg(out, "out")?;
        let h = ref_arg(history, "history")?;
        let spec = spec_arg(str_arg(spec, "spec")?)?;
        let budget = OracleBudget {
            max_operations,
            ..OracleBudget::default()
        };
        let ok = oracle::brute_force_check(&h.inner, &spec, &budget).map_err(|e| match e {
            oracle::OracleError::Spec(e) => Failure(LinchkStatus::SpecError, e.to_string()),
            other => Failure(LinchkStatus::OracleLimit, other.to_string()),
        })?;
        *out = if ok {
            LinchkVerdict::Linearizable
        } else {
            LinchkVerdict::NotLinearizable
        };
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linchk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
