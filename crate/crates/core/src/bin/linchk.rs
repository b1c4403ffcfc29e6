// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use linchk::bench::{self, BenchConfig};
use linchk::history::{parse_history, validate, write_history, History, PendingPolicy};
use linchk::oracle::{self, OracleBudget};
use linchk::report::{self, Algorithm, RunOptions};
use linchk::workload::{make_violation, run_workload, ImplSelector, OpMix, ViolationKind, WorkloadConfig};
use linchk::{SpecDescriptor, Verdict};

const EXIT_OK: u8 = 0;
const EXIT_NOT_LINEARIZABLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(name = "linchk", version, about = "Linearizability checker for concurrent histories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a JSONL history (exit 0 linearizable, 1 not, 2 error, 3 timeout)
    Check(CheckArgs),
    /// Record a history from a multi-threaded workload
    Generate(GenerateArgs),
    /// Run several algorithms over a directory of histories
    Bench(BenchArgs),
    /// Brute-force check of a small history
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Pending {
    Reject,
    Drop,
}

#[derive(Args)]
struct CheckArgs {
    /// History file; `-` or omitted reads standard input
    file: Option<PathBuf>,
    /// set, map or array:N
    #[arg(long, value_parser = parse_spec)]
    spec: SpecDescriptor,
    /// wg, wgl, wgl-lru or wgl-p (default: wgl-p when the spec partitions)
    #[arg(long, value_parser = parse_algo)]
    algo: Option<Algorithm>,
    /// LRU capacity (wgl-lru only)
    #[arg(long)]
    cache_capacity: Option<NonZeroUsize>,
    /// Give up after this many seconds
    #[arg(long)]
    timeout: Option<f64>,
    /// Print a linearization when one exists
    #[arg(long)]
    witness: bool,
    /// Write the JSON report to this path (`-` for standard output)
    #[arg(long, value_name = "PATH")]
    stats_json: Option<PathBuf>,
    /// Maximum concurrent partition checks (wgl-p only)
    #[arg(long)]
    parallel: Option<NonZeroUsize>,
    /// How to treat calls without a return
    #[arg(long, value_enum, default_value = "reject")]
    pending: Pending,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 4)]
    threads: usize,
    /// Operations per thread
    #[arg(long, default_value_t = 5_000)]
    ops: usize,
    /// Keys are drawn from 0..keys
    #[arg(long, default_value_t = 24)]
    keys: i64,
    /// coarse, striped, nonatomic or stale
    #[arg(long = "impl", default_value = "coarse", value_parser = parse_impl)]
    implementation: ImplSelector,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Insert,remove,contains weights
    #[arg(long, default_value = "1,1,1", value_parser = parse_mix)]
    mix: OpMix,
    /// 4 threads × 70 000 operations (overrides --threads/--ops)
    #[arg(long)]
    full_scale: bool,
    /// Emit a fixed non-linearizable fixture instead of running threads
    #[arg(long, value_parser = parse_violation, conflicts_with_all = ["full_scale"])]
    violation: Option<ViolationKind>,
    /// Output file (default: standard output)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of *.jsonl histories
    #[arg(long)]
    dir: PathBuf,
    /// Comma-separated algorithms
    #[arg(long, default_value = "wgl,wgl-lru,wgl-p", value_delimiter = ',', value_parser = parse_algo)]
    algos: Vec<Algorithm>,
    #[arg(long, default_value = "set", value_parser = parse_spec)]
    spec: SpecDescriptor,
    /// Per-check timeout in seconds
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long)]
    cache_capacity: Option<NonZeroUsize>,
    #[arg(long)]
    parallel: Option<NonZeroUsize>,
    /// Write the JSON report here
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// History file; `-` reads standard input
    file: PathBuf,
    #[arg(long, value_parser = parse_spec)]
    spec: SpecDescriptor,
    /// Refuse histories with more operations than this
    #[arg(long, default_value_t = 12)]
    max_ops: usize,
}

fn parse_spec(s: &str) -> Result<SpecDescriptor, String> {
    s.parse().map_err(|e: linchk::specs::SpecError| e.to_string())
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_impl(s: &str) -> Result<ImplSelector, String> {
    s.parse()
}

fn parse_violation(s: &str) -> Result<ViolationKind, String> {
    s.parse()
}

fn parse_mix(s: &str) -> Result<OpMix, String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [insert, remove, contains] => Ok(OpMix {
            insert,
            remove,
            contains,
        }),
        _ => Err("expected three comma-separated weights".into()),
    }
}

fn parse_timeout(secs: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(secs).map_err(|_| format!("invalid timeout {secs}"))
}

/// A user-facing failure: message plus exit code.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

fn read_history(path: Option<&Path>, pending: PendingPolicy) -> Result<History, Failure> {
    let history = match path {
        None => parse_history(io::stdin().lock())?,
        Some(p) if p == Path::new("-") => parse_history(io::stdin().lock())?,
        Some(p) => {
            let file = File::open(p).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", p.display())))?;
            parse_history(BufReader::new(file)).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", p.display())))?
        }
    };
    Ok(validate(history, pending)?)
}

fn write_to(path: &Path, contents: &str) -> Result<(), Failure> {
    if path == Path::new("-") {
        println!("{contents}");
        return Ok(());
    }
    std::fs::write(path, format!("{contents}\n")).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Linearizable => EXIT_OK,
        Verdict::NotLinearizable => EXIT_NOT_LINEARIZABLE,
        Verdict::Timeout => EXIT_TIMEOUT,
    }
}

fn cmd_check(args: CheckArgs) -> Result<u8, Failure> {
    let algorithm = args.algo.unwrap_or_else(|| Algorithm::default_for(&args.spec));
    if args.cache_capacity.is_some() && algorithm != Algorithm::WglLru {
        return Err(Failure(
            EXIT_USAGE,
            format!("--cache-capacity only applies to --algo wgl-lru (got {algorithm})"),
        ));
    }
    if args.parallel.is_some() && algorithm != Algorithm::WglP {
        return Err(Failure(
            EXIT_USAGE,
            format!("--parallel only applies to --algo wgl-p (got {algorithm})"),
        ));
    }
    let timeout = args.timeout.map(parse_timeout).transpose()?;
    let pending = match args.pending {
        Pending::Reject => PendingPolicy::Reject,
        Pending::Drop => PendingPolicy::Drop,
    };

    let history = read_history(args.file.as_deref(), pending)?;
    let opts = RunOptions {
        cache_capacity: args.cache_capacity,
        timeout,
        witness: args.witness,
        parallel: args.parallel.map(NonZeroUsize::get),
        ..RunOptions::new(algorithm)
    };
    let report = report::run(&history, &args.spec, &opts)?;

    match &args.stats_json {
        Some(p) if p == Path::new("-") => write_to(p, &report.to_json())?,
        Some(p) => {
            write_to(p, &report.to_json())?;
            println!("{}", report.summary());
        }
        None => println!("{}", report.summary()),
    }
    Ok(verdict_code(report.verdict))
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, Failure> {
    let history = if let Some(kind) = args.violation {
        make_violation(kind)
    } else {
        let mut cfg = WorkloadConfig {
            threads: args.threads,
            ops_per_thread: args.ops,
            key_range: args.keys,
            op_mix: args.mix,
            seed: args.seed,
            implementation: args.implementation,
        };
        if args.full_scale {
            let full = WorkloadConfig::full_scale();
            cfg.threads = full.threads;
            cfg.ops_per_thread = full.ops_per_thread;
        }
        cfg.validate().map_err(|e| Failure(EXIT_USAGE, e))?;
        run_workload(&cfg)
    };
    match &args.output {
        Some(p) if p != Path::new("-") => {
            let file = File::create(p).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", p.display())))?;
            let mut out = BufWriter::new(file);
            write_history(&history, &mut out)?;
            out.flush()?;
            eprintln!("wrote {} events to {}", history.len(), p.display());
        }
        _ => {
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            write_history(&history, &mut out)?;
            out.flush()?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Failure> {
    if args.algos.is_empty() {
        return Err(Failure(EXIT_USAGE, "--algos must name at least one algorithm".into()));
    }
    let cfg = BenchConfig {
        algorithms: args.algos,
        spec: args.spec,
        timeout: Some(parse_timeout(args.timeout)?),
        cache_capacity: args.cache_capacity,
        parallel: args.parallel.map(NonZeroUsize::get),
    };
    let report =
        bench::bench_dir(&args.dir, &cfg).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", args.dir.display())))?;
    print!("{}", report.to_table());
    if let Some(p) = &args.json {
        write_to(p, &report.to_json())?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(args: OracleArgs) -> Result<u8, Failure> {
    let history = if args.file == Path::new("-") {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        validate(linchk::history::parse_history_str(&buf)?, PendingPolicy::Reject)?
    } else {
        read_history(Some(&args.file), PendingPolicy::Reject)?
    };
    let budget = OracleBudget {
        max_operations: args.max_ops,
        ..Default::default()
    };
    let ok = oracle::brute_force_check(&history, &args.spec, &budget)?;
    println!("oracle: {}", if ok { "linearizable" } else { "not linearizable" });
    Ok(if ok { EXIT_OK } else { EXIT_NOT_LINEARIZABLE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("linchk: {msg}");
            ExitCode::from(code)
        }
    }
}
