// SPDX-License-Identifier: Apache-2.0

//! Runs several algorithms over a suite of histories and summarizes wall
//! time, cache size and timeouts per algorithm.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::checker::Verdict;
use crate::history::{parse_history, validate, History, PendingPolicy};
use crate::report::{self, Algorithm, RunOptions, SCHEMA_VERSION};
use crate::specs::SpecDescriptor;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub spec: SpecDescriptor,
    pub timeout: Option<Duration>,
    pub cache_capacity: Option<NonZeroUsize>,
    pub parallel: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: vec![Algorithm::Wgl, Algorithm::WglLru, Algorithm::WglP],
            spec: SpecDescriptor::SET,
            timeout: Some(Duration::from_secs(60)),
            cache_capacity: None,
            parallel: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub verdict: Option<Verdict>,
    pub seconds: f64,
    pub peak_cache_entries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FileResult {
    pub name: String,
    pub operations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub linearizable: usize,
    pub not_linearizable: usize,
    pub timeouts: usize,
    pub errors: usize,
    /// Over completed (non-timeout) runs.
    pub median_seconds: Option<f64>,
    pub mean_seconds: Option<f64>,
    pub median_peak_cache_entries: Option<f64>,
    pub max_peak_cache_entries: usize,
    pub timeout_percent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub spec: String,
    pub files: Vec<FileResult>,
    pub summary: Vec<AlgorithmSummary>,
    /// Peak resident set of the whole process, where the platform reports it.
    pub process_peak_rss_kib: Option<u64>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

/// `*.jsonl` files in `dir`, sorted by name.
pub fn history_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

fn load(path: &Path) -> Result<History, String> {
    let file = File::open(path).map_err(|e| e.to_string())?;
    let h = parse_history(BufReader::new(file)).map_err(|e| e.to_string())?;
    validate(h, PendingPolicy::Reject).map_err(|e| e.to_string())
}

/// Benchmarks every `*.jsonl` history in `dir`. Unreadable files are
/// reported individually and skipped.
pub fn bench_dir(dir: &Path, cfg: &BenchConfig) -> std::io::Result<BenchReport> {
    let suite = history_files(dir)?
        .into_iter()
        .map(|p| {
            let name = p
                .file_name()
                .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
            (name, load(&p))
        })
        .collect::<Vec<_>>();
    Ok(bench(&suite, cfg))
}

/// Benchmarks an in-memory suite.
pub fn bench(suite: &[(String, Result<History, String>)], cfg: &BenchConfig) -> BenchReport {
    let mut files = Vec::with_capacity(suite.len());
    for (name, loaded) in suite {
        let history = match loaded {
            Ok(h) => h,
            Err(e) => {
                files.push(FileResult {
                    name: name.clone(),
                    operations: 0,
                    error: Some(e.clone()),
                    runs: Vec::new(),
                });
                continue;
            }
        };
        let runs = cfg
            .algorithms
            .iter()
            .map(|&algorithm| {
                let opts = RunOptions {
                    cache_capacity: cfg.cache_capacity,
                    timeout: cfg.timeout,
                    parallel: cfg.parallel,
                    ..RunOptions::new(algorithm)
                };
                match report::run(history, &cfg.spec, &opts) {
                    Ok(r) => RunRecord {
                        algorithm,
                        verdict: Some(r.verdict),
                        seconds: r.stats.elapsed.as_secs_f64(),
                        peak_cache_entries: r.stats.peak_cache_entries,
                        error: None,
                    },
                    Err(e) => RunRecord {
                        algorithm,
                        verdict: None,
                        seconds: 0.0,
                        peak_cache_entries: 0,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        files.push(FileResult {
            name: name.clone(),
            operations: history.call_count(),
            error: None,
            runs,
        });
    }
    let summary = cfg.algorithms.iter().map(|&a| summarize(a, &files)).collect();
    BenchReport {
        schema_version: SCHEMA_VERSION,
        spec: cfg.spec.name(),
        files,
        summary,
        process_peak_rss_kib: peak_rss_kib(),
    }
}

fn summarize(algorithm: Algorithm, files: &[FileResult]) -> AlgorithmSummary {
    let runs: Vec<&RunRecord> = files
        .iter()
        .flat_map(|f| f.runs.iter())
        .filter(|r| r.algorithm == algorithm)
        .collect();
    let count = |v: Verdict| runs.iter().filter(|r| r.verdict == Some(v)).count();
    let completed: Vec<&&RunRecord> = runs
        .iter()
        .filter(|r| matches!(r.verdict, Some(Verdict::Linearizable | Verdict::NotLinearizable)))
        .collect();
    let mut secs: Vec<f64> = completed.iter().map(|r| r.seconds).collect();
    let mut peaks: Vec<f64> = completed.iter().map(|r| r.peak_cache_entries as f64).collect();
    let timeouts = count(Verdict::Timeout);
    AlgorithmSummary {
        algorithm,
        runs: runs.len(),
        linearizable: count(Verdict::Linearizable),
        not_linearizable: count(Verdict::NotLinearizable),
        timeouts,
        errors: runs.iter().filter(|r| r.error.is_some()).count(),
        mean_seconds: (!secs.is_empty()).then(|| secs.iter().sum::<f64>() / secs.len() as f64),
        median_seconds: median(&mut secs),
        median_peak_cache_entries: median(&mut peaks),
        max_peak_cache_entries: runs.iter().map(|r| r.peak_cache_entries).max().unwrap_or(0),
        timeout_percent: if runs.is_empty() {
            0.0
        } else {
            100.0 * timeouts as f64 / runs.len() as f64
        },
    }
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary_for(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summary.iter().find(|s| s.algorithm == algorithm)
    }

    /// Aligned text table, one row per algorithm.
    pub fn to_table(&self) -> String {
        let fmt_opt = |v: Option<f64>, prec: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>5} {:>6} {:>6} {:>8} {:>11} {:>11} {:>14} {:>9}",
            "algo", "runs", "lin", "nonlin", "timeout", "median(s)", "mean(s)", "median-cache", "timeout%"
        );
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{:<8} {:>5} {:>6} {:>6} {:>8} {:>11} {:>11} {:>14} {:>8.1}%",
                s.algorithm.name(),
                s.runs,
                s.linearizable,
                s.not_linearizable,
                s.timeouts,
                fmt_opt(s.median_seconds, 4),
                fmt_opt(s.mean_seconds, 4),
                fmt_opt(s.median_peak_cache_entries, 0),
                s.timeout_percent
            );
        }
        let failed: Vec<&FileResult> = self.files.iter().filter(|f| f.error.is_some()).collect();
        for f in failed {
            let _ = writeln!(out, "error: {}: {}", f.name, f.error.as_deref().unwrap_or(""));
        }
        out
    }
}
