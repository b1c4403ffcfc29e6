// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use linchk::fixtures;
use linchk::history::serialize_history;
use linchk::workload::{make_violation, ViolationKind};
use linchk::History;
use tempfile::TempDir;

fn linchk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linchk")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, h: &History) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serialize_history(h)).unwrap();
    path.to_str().unwrap().to_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn exit_codes_follow_verdicts() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "good.jsonl", &fixtures::concurrent_insert_remove());
    let bad = write(dir.path(), "bad.jsonl", &fixtures::sequential_insert_remove_contains());
    for algo in ["wg", "wgl", "wgl-lru", "wgl-p"] {
        assert_eq!(
            code(&linchk(&["check", &good, "--spec", "set", "--algo", algo])),
            0,
            "{algo}"
        );
        assert_eq!(
            code(&linchk(&["check", &bad, "--spec", "set", "--algo", algo])),
            1,
            "{algo}"
        );
    }
    assert_eq!(code(&linchk(&["check", &good, "--spec", "set"])), 0);
}

#[test]
fn usage_and_format_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "good.jsonl", &fixtures::concurrent_insert_remove());
    let garbage = dir.path().join("garbage.jsonl");
    std::fs::write(&garbage, "{\"kind\":\"call\"}\n").unwrap();
    let garbage = garbage.to_str().unwrap();

    assert_eq!(code(&linchk(&["check", garbage, "--spec", "set"])), 2);
    assert_eq!(code(&linchk(&["check", &good, "--spec", "stack"])), 2);
    assert_eq!(code(&linchk(&["check", &good, "--spec", "map"])), 2);
    assert_eq!(
        code(&linchk(&[
            "check",
            &good,
            "--spec",
            "set",
            "--algo",
            "wgl",
            "--cache-capacity",
            "4"
        ])),
        2
    );
    assert_eq!(
        code(&linchk(&[
            "check",
            &good,
            "--spec",
            "set",
            "--algo",
            "wgl",
            "--parallel",
            "2"
        ])),
        2
    );
    assert_eq!(code(&linchk(&["check", "/nonexistent/h.jsonl", "--spec", "set"])), 2);
    assert_eq!(code(&linchk(&["frobnicate"])), 2);
}

#[test]
fn pending_calls_rejected_or_dropped() {
    let dir = TempDir::new().unwrap();
    let mut h = fixtures::concurrent_insert_remove();
    let mut events = h.events().to_vec();
    events.pop();
    h = History::new(events);
    let path = write(dir.path(), "pending.jsonl", &h);
    assert_eq!(code(&linchk(&["check", &path, "--spec", "set"])), 2);
    assert_eq!(
        code(&linchk(&["check", &path, "--spec", "set", "--pending", "drop"])),
        0
    );
}

#[test]
fn stats_json_report() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "good.jsonl", &fixtures::concurrent_insert_remove());
    let out = linchk(&[
        "check",
        &good,
        "--spec",
        "set",
        "--algo",
        "wgl",
        "--witness",
        "--stats-json",
        "-",
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["algorithm"], "wgl");
    assert_eq!(report["verdict"], "linearizable");
    assert_eq!(report["operations"], 3);
    let ids: Vec<u64> = report["witness"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, [2, 1, 3]);
    assert!(report["stats"]["elapsed_seconds"].is_f64());

    let path = dir.path().join("report.json");
    let bad = write(dir.path(), "bad.jsonl", &make_violation(ViolationKind::DoubleInsert));
    let out = linchk(&[
        "check",
        &bad,
        "--spec",
        "set",
        "--algo",
        "wgl-p",
        "--stats-json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["verdict"], "not_linearizable");
    assert_eq!(report["failing_partition_key"], 1);
    assert_eq!(report["degenerate_partition"], true);
}

#[test]
fn generate_then_check_roundtrip() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("gen.jsonl");
    let p = path.to_str().unwrap();
    let out = linchk(&[
        "generate",
        "--threads",
        "3",
        "--ops",
        "200",
        "--keys",
        "5",
        "--seed",
        "9",
        "-o",
        p,
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1200);
    assert_eq!(code(&linchk(&["check", p, "--spec", "set"])), 0);

    let out = linchk(&["generate", "--violation", "lost_remove"]);
    assert_eq!(code(&out), 0);
    let v = dir.path().join("v.jsonl");
    std::fs::write(&v, &out.stdout).unwrap();
    assert_eq!(
        code(&linchk(&[
            "check",
            v.to_str().unwrap(),
            "--spec",
            "set",
            "--algo",
            "wg"
        ])),
        1
    );
    assert_eq!(code(&linchk(&["oracle", v.to_str().unwrap(), "--spec", "set"])), 1);
}

#[test]
fn timeout_exits_three() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("big.jsonl");
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&linchk(&[
            "generate",
            "--threads",
            "4",
            "--ops",
            "20000",
            "--keys",
            "24",
            "-o",
            p
        ])),
        0
    );
    assert_eq!(
        code(&linchk(&[
            "check",
            p,
            "--spec",
            "set",
            "--algo",
            "wg",
            "--timeout",
            "0"
        ])),
        3
    );
}

#[test]
fn bench_directory() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.jsonl", &fixtures::concurrent_insert_remove());
    write(dir.path(), "b.jsonl", &fixtures::sequential_insert_remove_contains());
    let json = dir.path().join("bench.json");
    let out = linchk(&[
        "bench",
        "--dir",
        dir.path().to_str().unwrap(),
        "--algos",
        "wg,wgl-p",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("wg ")));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["files"].as_array().unwrap().len(), 2);
    assert_eq!(report["summary"][1]["algorithm"], "wgl-p");
    assert_eq!(report["summary"][1]["linearizable"], 1);
    assert_eq!(report["summary"][1]["not_linearizable"], 1);
}
