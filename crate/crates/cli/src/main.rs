use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use ratio_prox::{
    canonicalize, enumerate, oracle_prox, prox_with_mode, q_value, Mode, OracleConfig, ProxProblem, ProxResult, SweepRecord,
};

mod input;

use input::{Format, Record};

/// Oracle beating prox by more than this is a check failure.
const CHECK_TOL: f64 = 1e-6;
/// Naive mode is quadratic; the benchmark skips it above this size.
const NAIVE_BENCH_MAX: usize = 10_000;

#[derive(Parser)]
#[command(name = "ratio-prox", version, about = "Proximity operator of mu*||x||_1/||x||_2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Default prox weight; records may override it.
    #[arg(long)]
    mu: Option<f64>,

    /// Value of the ratio at the origin.
    #[arg(long, default_value_t = 1.0)]
    a: f64,

    /// Input format (default: from the file extension).
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the prox for every record; one JSON object per line.
    Prox {
        /// Problem file, `-` for stdin.
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = Mode::Optimized)]
        mode: Mode,
        /// Emit every tied member, not only the first.
        #[arg(long)]
        all_solutions: bool,
        /// Human-readable table with 3 decimals instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Per-k diagnostics as CSV; records are separated by a blank line.
    Sweep {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = Mode::Optimized)]
        mode: Mode,
    },
    /// Median wall time of the prox on random Gaussian inputs.
    Bench {
        /// Comma-separated input sizes.
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the prox against the brute-force oracle (n <= 8).
    Check {
        /// Problem file; omit when using --random.
        #[arg(required_unless_present = "random")]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = Mode::Optimized)]
        mode: Mode,
        /// Check this many random instances instead of a file.
        #[arg(long, conflicts_with = "input")]
        random: Option<usize>,
        /// Dimension of the random instances.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Oracle restarts per instance.
        #[arg(long, default_value_t = OracleConfig::default().n_starts)]
        starts: usize,
    },
}

enum Failure {
    Check(String),
    Input(anyhow::Error),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn problems(records: Vec<Record>, common: &Common) -> anyhow::Result<Vec<ProxProblem>> {
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mu = r.mu.or(common.mu).ok_or_else(|| anyhow::anyhow!("record {i}: no mu given (use --mu)"))?;
            ProxProblem::new(r.y, mu, r.a.unwrap_or(common.a)).map_err(|e| anyhow::anyhow!("record {i}: {e}"))
        })
        .collect()
}

fn load(input: &Path, common: &Common) -> anyhow::Result<Vec<ProxProblem>> {
    problems(input::read(input, common.format)?, common)
}

#[derive(Serialize)]
struct MemberOut<'a> {
    k: usize,
    x: &'a [f64],
    q: f64,
}

#[derive(Serialize)]
struct FailureOut {
    k: usize,
    error: String,
}

#[derive(Serialize)]
struct ProxOut<'a> {
    record: usize,
    members: Vec<MemberOut<'a>>,
    contains_zero: bool,
    is_set_valued: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failures: Vec<FailureOut>,
}

fn numerical_report(record: usize, result: &ProxResult) -> Option<String> {
    let first = result.failures.first()?;
    Some(format!("record {record}: k = {}: {}", first.k, first.error))
}

/// A member as emitted: `q` is recomputed on the emitted `x`.
struct Shown {
    k: usize,
    x: Vec<f64>,
    q: f64,
}

fn shown_members(problem: &ProxProblem, result: &ProxResult, all: bool) -> Vec<Shown> {
    let count = if all { result.members.len() } else { 1 };
    (0..count)
        .map(|i| {
            let x = result.member_point(i);
            Shown { k: result.members[i].k, q: q_value(&x, problem), x }
        })
        .collect()
}

fn write_table(out: &mut dyn Write, index: usize, problem: &ProxProblem, members: &[Shown]) -> io::Result<()> {
    writeln!(out, "record {index}  mu = {}  a = {}", problem.mu, problem.a)?;
    writeln!(out, "{:>6}  {:>12}  x", "k", "Q")?;
    for m in members {
        let x: Vec<String> = m.x.iter().map(|v| format!("{v:.3}")).collect();
        writeln!(out, "{:>6}  {:>12.3}  [{}]", m.k, m.q, x.join(", "))?;
    }
    writeln!(out)
}

fn cmd_prox(input: &Path, common: &Common, mode: Mode, all_solutions: bool, table: bool) -> Outcome {
    let problems = load(input, common)?;
    let results: Vec<ProxResult> = problems
        .par_iter()
        .map(|p| prox_with_mode(p, mode).expect("validated on load"))
        .collect();

    let mut out = open_out(common.out.as_deref())?;
    let mut numerical = None;
    for (i, (problem, result)) in problems.iter().zip(&results).enumerate() {
        let shown = shown_members(problem, result, all_solutions);
        if table {
            write_table(&mut out, i, problem, &shown)?;
        } else {
            let record = ProxOut {
                record: i,
                members: shown.iter().map(|m| MemberOut { k: m.k, x: &m.x, q: m.q }).collect(),
                contains_zero: result.contains_zero,
                is_set_valued: result.is_set_valued,
                failures: result.failures.iter().map(|f| FailureOut { k: f.k, error: f.error.to_string() }).collect(),
            };
            serde_json::to_writer(&mut out, &record)?;
            writeln!(out)?;
        }
        numerical = numerical.or_else(|| numerical_report(i, result));
    }
    out.flush()?;
    numerical.map_or(Ok(()), |msg| Err(Failure::Numerical(msg)))
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn sweep_row(r: &SweepRecord) -> String {
    format!("{},{},{},{},{},{}", r.k, cell(r.a_k), r.exists, cell(r.lambda_star), cell(r.f_value), cell(r.q_value))
}

fn cmd_sweep(input: &Path, common: &Common, mode: Mode) -> Outcome {
    let problems = load(input, common)?;
    let sweeps: Vec<_> = problems.par_iter().map(|p| enumerate(&canonicalize(&p.y), p.mu, mode)).collect();

    let mut out = open_out(common.out.as_deref())?;
    writeln!(out, "k,A_k,exists,lambda_star,F,Q")?;
    let mut numerical = None;
    for (i, sweep) in sweeps.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        for r in &sweep.diagnostics.records {
            writeln!(out, "{}", sweep_row(r))?;
        }
        if let (None, Some(f)) = (&numerical, sweep.failures.first()) {
            numerical = Some(format!("record {i}: k = {}: {}", f.k, f.error));
        }
    }
    out.flush()?;
    numerical.map_or(Ok(()), |msg| Err(Failure::Numerical(msg)))
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

fn cmd_bench(sizes: &[usize], trials: usize, seed: u64, mu: f64, out: Option<&Path>) -> Outcome {
    if trials == 0 || sizes.contains(&0) {
        return Err(anyhow::anyhow!("--trials and every --n must be positive").into());
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(anyhow::anyhow!("mu must be positive and finite").into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = open_out(out)?;
    writeln!(out, "n,time,mode")?;
    for &n in sizes {
        let inputs: Vec<ProxProblem> =
            (0..trials).map(|_| ProxProblem { y: gaussian(n, &mut rng), mu, a: 1.0 }).collect();
        let mut modes = vec![Mode::Optimized];
        if n <= NAIVE_BENCH_MAX {
            modes.push(Mode::Naive);
        }
        for mode in modes {
            let times: Vec<f64> = inputs
                .iter()
                .map(|p| {
                    let start = Instant::now();
                    let r = prox_with_mode(p, mode).expect("generated input is valid");
                    let t = start.elapsed().as_secs_f64();
                    std::hint::black_box(r);
                    t
                })
                .collect();
            writeln!(out, "{n},{},{mode}", median(times))?;
        }
        out.flush()?;
    }
    Ok(())
}

/// Gaussian `y`, `μ` log-uniform on `[1e-3, 1e2]`, `a ∈ {0, 0.5, 1}`.
fn random_problems(count: usize, dim: usize, seed: u64) -> Vec<ProxProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let y = gaussian(dim, &mut rng);
            let mu = 10f64.powf(rng.random_range(-3.0..=2.0));
            let a = [0.0, 0.5, 1.0][rng.random_range(0..3)];
            ProxProblem { y, mu, a }
        })
        .collect()
}

#[derive(Debug)]
struct CheckRow {
    prox_q: f64,
    oracle_q: f64,
}

impl CheckRow {
    fn gap(&self) -> f64 {
        self.prox_q - self.oracle_q
    }
}

fn cmd_check(input: Option<&Path>, common: &Common, mode: Mode, random: Option<usize>, dim: usize, seed: u64, starts: usize) -> Outcome {
    let problems = match (random, input) {
        (Some(count), _) => {
            if dim == 0 || dim > ratio_prox::oracle::MAX_ORACLE_DIM {
                return Err(anyhow::anyhow!("--dim must be in 1..={}", ratio_prox::oracle::MAX_ORACLE_DIM).into());
            }
            random_problems(count, dim, seed)
        }
        (None, Some(path)) => load(path, common)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some((i, p)) = problems.iter().enumerate().find(|(_, p)| p.dim() > ratio_prox::oracle::MAX_ORACLE_DIM) {
        return Err(anyhow::anyhow!("record {i}: n = {} exceeds the oracle limit", p.dim()).into());
    }

    let rows: Vec<Result<CheckRow, String>> = problems
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let cfg = OracleConfig { n_starts: starts, seed: seed.wrapping_add(i as u64), ..OracleConfig::default() };
            let r = prox_with_mode(p, mode).map_err(|e| e.to_string())?;
            if let Some(msg) = numerical_report(i, &r) {
                return Err(msg);
            }
            let o = oracle_prox(p, &cfg).map_err(|e| e.to_string())?;
            Ok(CheckRow { prox_q: r.q(), oracle_q: o.q })
        })
        .collect();

    let mut out = open_out(common.out.as_deref())?;
    let mut failures = 0;
    let mut max_gap = f64::NEG_INFINITY;
    for (i, row) in rows.iter().enumerate() {
        match row {
            Ok(row) => {
                max_gap = max_gap.max(row.gap());
                if row.gap() > CHECK_TOL {
                    failures += 1;
                    writeln!(out, "FAIL record {i}: prox Q = {}, oracle Q = {}, gap = {:e}", row.prox_q, row.oracle_q, row.gap())?;
                }
            }
            Err(msg) => {
                failures += 1;
                writeln!(out, "FAIL {msg}")?;
            }
        }
    }
    writeln!(out, "checked {} records, max Q-gap (prox - oracle) = {:e}, failures = {failures}", rows.len(), max_gap)?;
    out.flush()?;
    if failures > 0 {
        Err(Failure::Check(format!("{failures} of {} records failed", rows.len())))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Prox { input, common, mode, all_solutions, table } => cmd_prox(&input, &common, mode, all_solutions, table),
        Command::Sweep { input, common, mode } => cmd_sweep(&input, &common, mode),
        Command::Bench { n, trials, seed, mu, out } => cmd_bench(&n, trials, seed, mu, out.as_deref()),
        Command::Check { input, common, mode, random, dim, seed, starts } => {
            cmd_check(input.as_deref(), &common, mode, random, dim, seed, starts)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Input(e) => eprintln!("error: {e:#}"),
                Failure::Numerical(msg) => eprintln!("numerical failure: {msg}"),
                Failure::Check(msg) => eprintln!("check failed: {msg}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
