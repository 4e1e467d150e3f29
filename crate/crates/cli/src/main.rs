//! `blockdec`: generate instances, run solvers, check stationarity, reproduce
//! the running-example landscape, and run configured benchmarks.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use blockdec::harness::formats::{
    load_instance, parse_points, write_dense_instance, write_points, write_sparse_text,
};
use blockdec::harness::output::{results_csv, trace_csv};
use blockdec::harness::solver::outcome_nnz;
use blockdec::harness::{
    generate, landscape_csv, run_benchmark, run_solver, BenchConfig, InstanceKind, InstanceSpec,
    Mode, ResultRow, SolveSettings, SolverKind, SparseLoadOptions,
};
use blockdec::problem::running_example;
use blockdec::stationarity::{
    is_basic, is_block_k, is_l_stationary, landscape_table, BlockCheckMode, BLOCK_TOL, COORD_TOL,
};
use blockdec::{CompositeProblem, Error, ErrorKind, QuadraticObjective, Result, SparsityTerm};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "blockdec",
    version,
    about = "Block decomposition solvers for l0 sparse least squares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance file.
    Generate(GenerateArgs),
    /// Run one solver on an instance and print a results row.
    Solve(SolveArgs),
    /// Check a stationarity condition at a point.
    Verify(VerifyArgs),
    /// Landscape counts for the built-in six-dimensional example.
    Table1(Table1Args),
    /// Run a TOML-configured benchmark.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    RandomCorrupt,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Dense,
    Sparse,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "random")]
    kind: GenKind,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    support: usize,
    #[arg(long, default_value_t = 10.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.02)]
    corrupt_fraction: f64,
    #[arg(long, default_value_t = 100.0)]
    corrupt_factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    format: FileFormat,
    /// Also write the planted signal, one value per line.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Dense (`m n` header) or sparse (`label idx:val ...`) instance file.
    #[arg(long)]
    instance: PathBuf,
    /// Sparse files: keep this many rows, sampled without replacement.
    #[arg(long)]
    rows: Option<usize>,
    /// Sparse files: keep this many columns, sampled without replacement.
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    n_features: Option<usize>,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
}

impl InstanceArgs {
    fn load(&self) -> Result<QuadraticObjective> {
        let opts = SparseLoadOptions {
            n_features: self.n_features,
            rows: self.rows,
            cols: self.cols,
            seed: self.sample_seed,
        };
        let (a, b) = load_instance(&self.instance, &opts)?;
        QuadraticObjective::factored(a, b)
    }
}

#[derive(Args)]
#[group(id = "level", required = true, multiple = false)]
struct LevelArgs {
    /// Sparsity level for `‖x‖₀ ≤ s`.
    #[arg(long, group = "level")]
    s: Option<usize>,
    /// Penalty weight for `λ‖x‖₀`.
    #[arg(long, group = "level")]
    lambda: Option<f64>,
}

impl LevelArgs {
    fn term(&self) -> SparsityTerm {
        match (self.s, self.lambda) {
            (Some(s), _) => SparsityTerm::Cardinality(s),
            (_, Some(l)) => SparsityTerm::Penalty(l),
            _ => unreachable!("clap requires one of --s/--lambda"),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// dec, pgm, apgm, omp, cvx-l1, pgm-l1, pgm-lhalf, or dec-r<k>g<k>.
    #[arg(long)]
    solver: String,
    #[arg(long, default_value = "cons")]
    mode: String,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Random working-set coordinates for dec.
    #[arg(long)]
    krand: Option<usize>,
    /// Greedy working-set coordinates for dec.
    #[arg(long)]
    kgreedy: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    theta: f64,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 50)]
    window: usize,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the solution, one value per line.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report measured times instead of 0.
    #[arg(long)]
    wall_clock: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Basic,
    Lstat,
    Blockk,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMode {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    point: PathBuf,
    #[command(flatten)]
    level: LevelArgs,
    #[arg(long, value_enum)]
    check: Check,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: CheckMode,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step constant for lstat; defaults to the largest eigenvalue of the Gram matrix.
    #[arg(long)]
    lipschitz: Option<f64>,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, value_parser = ["cons", "regu"])]
    mode: String,
    #[arg(long, default_value_t = 4)]
    s: usize,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let spec = InstanceSpec {
        kind: match a.kind {
            GenKind::Random => InstanceKind::RandomMN,
            GenKind::RandomCorrupt => InstanceKind::RandomMNCorrupted,
        },
        m: a.m,
        n: a.n,
        true_support: a.support,
        noise_scale: a.noise,
        corrupt_fraction: a.corrupt_fraction,
        corrupt_factor: a.corrupt_factor,
        seed: a.seed,
        path: None,
    };
    let inst = generate(&spec)?;
    let text = match a.format {
        FileFormat::Dense => write_dense_instance(&inst.a, &inst.b),
        FileFormat::Sparse => write_sparse_text(&inst.a, &inst.b)?,
    };
    fs::write(&a.out, text)?;
    if let Some(path) = &a.truth {
        fs::write(path, write_points(&inst.x_true))?;
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let mode = Mode::parse(&a.mode)?;
    let param = match (mode, a.s, a.lambda) {
        (Mode::Cons, Some(s), None) => s as f64,
        (Mode::Regu, None, Some(l)) => l,
        (Mode::Cons, _, _) => {
            return Err(Error::invalid("--mode cons takes --s (and not --lambda)"))
        }
        (Mode::Regu, _, _) => {
            return Err(Error::invalid("--mode regu takes --lambda (and not --s)"))
        }
    };
    let mut kind = SolverKind::parse(&a.solver)?;
    match &mut kind {
        SolverKind::Dec { n_random, n_greedy } => {
            *n_random = a.krand.unwrap_or(*n_random);
            *n_greedy = a.kgreedy.unwrap_or(*n_greedy);
        }
        _ if a.krand.is_some() || a.kgreedy.is_some() => {
            return Err(Error::invalid("--krand/--kgreedy apply to dec only"));
        }
        _ => {}
    }
    let objective = a.instance.load()?;
    let mut settings = SolveSettings {
        theta: a.theta,
        ..SolveSettings::default()
    };
    settings.stop.epsilon = a.epsilon;
    settings.stop.window = a.window;
    settings.stop.max_iters = a.max_iters;
    let start = std::time::Instant::now();
    let out = run_solver(kind, &objective, mode, param, a.seed, &settings)?;
    let wall_s = if a.wall_clock {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    if let Some(path) = &a.trace {
        let trace = out
            .trace
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("solver {kind} records no trace")))?;
        fs::write(path, trace_csv(trace, a.wall_clock))?;
    }
    if let Some(path) = &a.out {
        fs::write(path, write_points(&out.x))?;
    }
    let row = ResultRow {
        instance: a
            .instance
            .instance
            .file_stem()
            .map_or(String::new(), |s| s.to_string_lossy().into_owned()),
        solver: kind.to_string(),
        mode: mode.label().to_string(),
        param,
        seed: a.seed,
        final_objective: out.final_objective,
        nnz: outcome_nnz(&out),
        iters: out.iters,
        wall_s,
    };
    print!("{}", results_csv(&[row]));
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let objective = a.instance.load()?;
    let prob = CompositeProblem::new(objective, a.level.term())?;
    let x = parse_points(&fs::read_to_string(&a.point)?)?;
    let (label, holds) = match a.check {
        Check::Basic => ("basic".to_string(), is_basic(&prob, &x, COORD_TOL)?),
        Check::Lstat => {
            let l = a
                .lipschitz
                .unwrap_or_else(|| prob.objective.lipschitz_global());
            if !(l > 0.0) {
                return Err(Error::ZeroLipschitz);
            }
            (
                "lstat".to_string(),
                is_l_stationary(&prob, &x, l, COORD_TOL)?,
            )
        }
        Check::Blockk => {
            let mode = match a.mode {
                CheckMode::Exhaustive => BlockCheckMode::Exhaustive,
                CheckMode::Sampled => BlockCheckMode::Sampled {
                    trials: a.trials,
                    seed: a.seed,
                },
            };
            (
                format!("block_{}", a.k),
                is_block_k(&prob, &x, a.k, BLOCK_TOL, mode)?,
            )
        }
    };
    let value = prob.composite_value(&x)?;
    println!("check,holds,objective");
    println!("{label},{holds},{value}");
    Ok(())
}

const TABLE1_K_MAX: usize = 6;

fn cmd_table1(a: Table1Args) -> Result<()> {
    let term = if a.mode == "cons" {
        SparsityTerm::Cardinality(a.s)
    } else {
        SparsityTerm::Penalty(a.lambda)
    };
    let prob = CompositeProblem::new(running_example(), term)?;
    let counts = landscape_table(&prob, TABLE1_K_MAX)?;
    print!("{}", landscape_csv(&a.mode, &counts, TABLE1_K_MAX));
    Ok(())
}

fn cmd_benchmark(a: BenchmarkArgs) -> Result<()> {
    let config = BenchConfig::load(&a.config)?;
    let rows = run_benchmark(&config, &a.out_dir)?;
    eprintln!("{} runs written to {}", rows.len(), a.out_dir.display());
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
