//! Command-line front end: solve built-in or user-defined problems, run the
//! benchmark table, and dump GL weights or derivative approximations.

use crate::error::Error;
use crate::expr::{self, EvalContext, Var};
use crate::fracnum::{gl_left, gl_left_shifted, gl_right, GridSamples};
use crate::model::{self, VariationalProblem};
use crate::solve::{solve, ForcePath, SolveOptions, SolveReport};
use crate::special::{gamma, GlWeights};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const EXIT_BAD_FLAGS: i32 = 2;
const EXIT_SOLVER_FAILURE: i32 = 3;
const EXIT_CONFIG_ERROR: i32 = 4;

#[derive(Parser)]
#[command(
    name = "fracvar",
    version,
    about = "Direct numerical solver for fractional variational problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a built-in or user-defined problem on a uniform mesh
    Solve(SolveArgs),
    /// Run benchmark rows and compare against published reference errors
    Benchmark(BenchmarkArgs),
    /// Print Grünwald-Letnikov weights and their partial sums
    Weights(WeightsArgs),
    /// Tabulate a GL derivative approximation of a monomial on [0, 1]
    Deriv(DerivArgs),
}

#[derive(Args)]
#[command(group(
    clap::ArgGroup::new("source")
        .required(true)
        .args(["example", "problem"])
))]
struct SolveArgs {
    /// Built-in example number (1, 2, or 3)
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    example: Option<u8>,

    /// Path to a JSON problem config
    #[arg(long)]
    problem: Option<PathBuf>,

    /// Number of mesh subintervals (at least 3)
    #[arg(long)]
    n: usize,

    /// Write per-node results to this file
    #[arg(long)]
    out: Option<PathBuf>,

    /// Solution path selection
    #[arg(long, value_enum, default_value_t = PathChoice::Auto)]
    force_path: PathChoice,

    /// Residual tolerance override
    #[arg(long)]
    tol: Option<f64>,

    /// Output file format
    #[arg(long, value_enum, default_value_t = SolveFormat::Csv)]
    format: SolveFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathChoice {
    Auto,
    Linear,
    Newton,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Rows to run, as comma-separated example:n pairs (n counts mesh points)
    #[arg(long)]
    rows: Option<String>,

    /// Write the table to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,

    /// Table format
    #[arg(long, value_enum, default_value_t = BenchFormat::Csv)]
    format: BenchFormat,

    /// Run rows on worker threads instead of sequentially
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchFormat {
    Csv,
    Md,
}

#[derive(Args)]
struct WeightsArgs {
    /// Derivative order, in (0, 1)
    #[arg(long)]
    alpha: f64,

    /// Largest weight index to print
    #[arg(long)]
    count: usize,
}

#[derive(Args)]
struct DerivArgs {
    /// Derivative order, in (0, 1)
    #[arg(long)]
    alpha: f64,

    /// Number of mesh subintervals on [0, 1] (at least 2)
    #[arg(long)]
    n: usize,

    /// Power p of the sampled monomial t^p
    #[arg(long)]
    monomial: f64,

    /// Which GL operator to tabulate
    #[arg(long, value_enum, default_value_t = Side::Left)]
    side: Side,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Left,
    Right,
    Shifted,
}

/// Parses command-line arguments and dispatches; returns the process exit
/// code (0 success, 2 bad flags, 3 solver failure, 4 config error).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let informational = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if informational { 0 } else { EXIT_BAD_FLAGS };
        }
    };
    match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
        Command::Weights(args) => cmd_weights(&args),
        Command::Deriv(args) => cmd_deriv(&args),
    }
}

fn cmd_solve(args: &SolveArgs) -> i32 {
    if args.n < 3 {
        eprintln!("error: --n must be at least 3, got {}", args.n);
        return EXIT_BAD_FLAGS;
    }
    let mut options = SolveOptions::default();
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            eprintln!("error: --tol must be a positive finite number, got {tol}");
            return EXIT_BAD_FLAGS;
        }
        options.tol_residual = tol;
    }
    options.force_path = match args.force_path {
        PathChoice::Auto => ForcePath::Auto,
        PathChoice::Linear => ForcePath::Linear,
        PathChoice::Newton => ForcePath::Newton,
    };

    let problem = if let Some(example) = args.example {
        model::by_name(&format!("example{example}")).expect("example range checked by clap")
    } else {
        let path = args.problem.as_deref().expect("clap group guarantees a source");
        match load_problem(path) {
            Ok(problem) => problem,
            Err(message) => {
                eprintln!("error: {message}");
                return EXIT_CONFIG_ERROR;
            }
        }
    };

    let report = match solve(&problem, args.n, &options) {
        Ok(report) => report,
        Err(Error::NoConvergence {
            iterations,
            residual,
            ..
        }) => {
            eprintln!(
                "error: solver did not converge after {iterations} iteration(s); \
                 final residual {residual:.6e}"
            );
            return EXIT_SOLVER_FAILURE;
        }
        Err(err @ (Error::NotAffine | Error::Singular { .. })) => {
            eprintln!("error: {err}");
            return EXIT_SOLVER_FAILURE;
        }
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_BAD_FLAGS;
        }
    };

    if let Some(out) = &args.out {
        let content = match args.format {
            SolveFormat::Csv => render_solve_csv(&problem, &report),
            SolveFormat::Json => render_solve_json(&problem, &report),
        };
        if let Err(err) = fs::write(out, content) {
            eprintln!("error: cannot write {}: {err}", out.display());
            return EXIT_BAD_FLAGS;
        }
    }
    println!("{}", summary_line(&report));
    0
}

fn summary_line(report: &SolveReport) -> String {
    let error = match report.error_vs_exact {
        Some(e) => format!("{e:.6e}"),
        None => "n/a".to_string(),
    };
    format!(
        "path={} residual={:.6e} E={error} T={:.6}",
        report.path, report.residual_inf_norm, report.wall_seconds
    )
}

fn render_solve_csv(problem: &VariationalProblem, report: &SolveReport) -> String {
    let mesh = report.trajectory.mesh();
    let values = report.trajectory.values();
    let mut out = String::new();
    if problem.has_exact() {
        out.push_str("i,t,x,exact,abs_err\n");
        for (i, &x) in values.iter().enumerate() {
            let t = mesh.node(i);
            let exact = problem.exact_at(t).expect("exact presence checked");
            let _ = writeln!(
                out,
                "{i},{t:.16e},{x:.16e},{exact:.16e},{:.16e}",
                (x - exact).abs()
            );
        }
    } else {
        out.push_str("i,t,x\n");
        for (i, &x) in values.iter().enumerate() {
            let t = mesh.node(i);
            let _ = writeln!(out, "{i},{t:.16e},{x:.16e}");
        }
    }
    out
}

#[derive(Serialize)]
struct SolveRow {
    i: usize,
    t: f64,
    x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_err: Option<f64>,
}

#[derive(Serialize)]
struct SolveDocument {
    path: String,
    residual_inf_norm: f64,
    iterations: usize,
    error_vs_exact: Option<f64>,
    wall_seconds: f64,
    rows: Vec<SolveRow>,
}

fn render_solve_json(problem: &VariationalProblem, report: &SolveReport) -> String {
    let mesh = report.trajectory.mesh();
    let rows = report
        .trajectory
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let t = mesh.node(i);
            let exact = problem.exact_at(t);
            SolveRow {
                i,
                t,
                x,
                exact,
                abs_err: exact.map(|e| (x - e).abs()),
            }
        })
        .collect();
    let document = SolveDocument {
        path: report.path.to_string(),
        residual_inf_norm: report.residual_inf_norm,
        iterations: report.iterations,
        error_vs_exact: report.error_vs_exact,
        wall_seconds: report.wall_seconds,
        rows,
    };
    let mut text = serde_json::to_string_pretty(&document).expect("report serializes");
    text.push('\n');
    text
}

/// User problem description read from a JSON config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub xa: f64,
    pub xb: f64,
    pub lagrangian: String,
    #[serde(default)]
    pub exact: Option<String>,
}

impl ProblemConfig {
    /// Parses a JSON config document; error messages carry line and column.
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    /// Compiles the expressions and builds the runnable problem, rejecting
    /// configs whose invariants fail; messages carry offsets where they
    /// apply. The exact expression may reference only the variable t and
    /// must match the boundary values to 1e-9.
    pub fn build(&self) -> Result<VariationalProblem, String> {
        let lagrangian =
            expr::to_lagrangian(&self.lagrangian).map_err(|e| format!("lagrangian: {e}"))?;
        let mut problem =
            VariationalProblem::new(self.a, self.b, self.alpha, self.xa, self.xb, lagrangian);
        if let Some(source) = &self.exact {
            let ast = expr::parse(source).map_err(|e| format!("exact: {e}"))?;
            for var in [Var::X, Var::Dax, Var::Dx] {
                if ast.contains_var(var) {
                    return Err("exact: only the variable t may appear".to_string());
                }
            }
            let exact_fn = move |t: f64| {
                expr::eval(
                    &ast,
                    &EvalContext {
                        t,
                        x: 0.0,
                        dax: 0.0,
                        dx: 0.0,
                    },
                )
                .unwrap_or(f64::NAN)
            };
            problem = problem.with_exact(exact_fn);
        }
        let findings = model::validate(&problem);
        if !findings.is_empty() {
            return Err(format!("config invalid: {}", findings.join("; ")));
        }
        Ok(problem)
    }
}

fn load_problem(path: &Path) -> Result<VariationalProblem, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ProblemConfig::from_json(&text)?.build()
}

/// One benchmark row outcome. `n` counts mesh points; the solve runs on
/// n - 1 subintervals.
#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub example: u8,
    pub n: usize,
    pub wall_seconds: f64,
    pub error: f64,
    pub reference: Option<f64>,
    pub rel_dev: Option<f64>,
    pub passed: bool,
}

/// Published reference errors (example, mesh points, max-norm error) from
/// the original experiment table.
const REFERENCE_ERRORS: &[(u8, usize, f64)] = &[
    (1, 5, 0.0264),
    (1, 10, 0.0158),
    (1, 30, 0.0065),
    (2, 5, 0.0070),
    (2, 10, 0.0035),
    (2, 30, 0.0012),
    (3, 5, 1.4787),
    (3, 20, 0.3006),
    (3, 90, 0.0618),
];

const BENCHMARK_TOLERANCE: f64 = 0.10;

fn reference_error(example: u8, n: usize) -> Option<f64> {
    REFERENCE_ERRORS
        .iter()
        .find(|(e, m, _)| *e == example && *m == n)
        .map(|(_, _, v)| *v)
}

/// The default row set: all nine rows with published reference errors.
pub fn default_rows() -> Vec<(u8, usize)> {
    REFERENCE_ERRORS.iter().map(|(e, n, _)| (*e, *n)).collect()
}

fn run_benchmark_row(example: u8, n: usize) -> crate::error::Result<BenchmarkRow> {
    let problem = model::by_name(&format!("example{example}"))
        .ok_or_else(|| Error::InvalidProblem(format!("no built-in example {example}")))?;
    let report = solve(&problem, n - 1, &SolveOptions::default())?;
    let error = report.error_vs_exact.unwrap_or(f64::NAN);
    let reference = reference_error(example, n);
    let rel_dev = reference.map(|r| (error - r) / r);
    let passed = rel_dev.is_none_or(|d| d.is_finite() && d.abs() <= BENCHMARK_TOLERANCE);
    Ok(BenchmarkRow {
        example,
        n,
        wall_seconds: report.wall_seconds,
        error,
        reference,
        rel_dev,
        passed,
    })
}

/// Runs benchmark rows given as (example, mesh points) pairs, sequentially
/// or on one worker thread per row.
pub fn run_benchmark_rows(
    rows: &[(u8, usize)],
    parallel: bool,
) -> crate::error::Result<Vec<BenchmarkRow>> {
    if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = rows
                .iter()
                .map(|&(example, n)| scope.spawn(move || run_benchmark_row(example, n)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("benchmark worker panicked"))
                .collect()
        })
    } else {
        rows.iter()
            .map(|&(example, n)| run_benchmark_row(example, n))
            .collect()
    }
}

fn parse_rows(spec: &str) -> Result<Vec<(u8, usize)>, String> {
    let mut rows = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let Some((example_text, n_text)) = part.split_once(':') else {
            return Err(format!("row `{part}` is not of the form example:n"));
        };
        let example: u8 = example_text
            .trim()
            .parse()
            .map_err(|_| format!("bad example number in `{part}`"))?;
        if !(1..=3).contains(&example) {
            return Err(format!("example must be 1, 2, or 3 in `{part}`"));
        }
        let n: usize = n_text
            .trim()
            .parse()
            .map_err(|_| format!("bad mesh point count in `{part}`"))?;
        if n < 4 {
            return Err(format!("mesh point count must be at least 4 in `{part}`"));
        }
        rows.push((example, n));
    }
    Ok(rows)
}

fn cmd_benchmark(args: &BenchmarkArgs) -> i32 {
    let rows = match &args.rows {
        Some(spec) => match parse_rows(spec) {
            Ok(rows) => rows,
            Err(message) => {
                eprintln!("error: {message}");
                return EXIT_BAD_FLAGS;
            }
        },
        None => default_rows(),
    };
    let results = match run_benchmark_rows(&rows, args.parallel) {
        Ok(results) => results,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_SOLVER_FAILURE;
        }
    };
    let table = match args.format {
        BenchFormat::Csv => render_benchmark_csv(&results),
        BenchFormat::Md => render_benchmark_md(&results),
    };
    if let Some(out) = &args.out {
        if let Err(err) = fs::write(out, &table) {
            eprintln!("error: cannot write {}: {err}", out.display());
            return EXIT_BAD_FLAGS;
        }
    } else {
        print!("{table}");
    }
    let failing: Vec<&BenchmarkRow> = results.iter().filter(|r| !r.passed).collect();
    if !failing.is_empty() {
        for row in &failing {
            eprintln!(
                "failing row: example {} n = {}: E = {:.6e}, reference {}, deviation {:+.1}%",
                row.example,
                row.n,
                row.error,
                row.reference.unwrap_or(f64::NAN),
                row.rel_dev.unwrap_or(f64::NAN) * 100.0
            );
        }
        return EXIT_SOLVER_FAILURE;
    }
    0
}

fn format_reference(row: &BenchmarkRow) -> (String, String) {
    match (row.reference, row.rel_dev) {
        (Some(r), Some(d)) => (format!("{r}"), format!("{d:.6e}")),
        _ => ("n/a".to_string(), "n/a".to_string()),
    }
}

fn render_benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from("example,n,T,E,ref_E,rel_dev\n");
    for row in rows {
        let (reference, rel_dev) = format_reference(row);
        let _ = writeln!(
            out,
            "{},{},{:.6e},{:.16e},{reference},{rel_dev}",
            row.example, row.n, row.wall_seconds, row.error
        );
    }
    out
}

fn render_benchmark_md(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(
        "| example | n | T | E | ref_E | rel_dev |\n|---|---|---|---|---|---|\n",
    );
    for row in rows {
        let (reference, rel_dev) = format_reference(row);
        let _ = writeln!(
            out,
            "| {} | {} | {:.6e} | {:.16e} | {reference} | {rel_dev} |",
            row.example, row.n, row.wall_seconds, row.error
        );
    }
    out
}

fn cmd_weights(args: &WeightsArgs) -> i32 {
    let weights = match GlWeights::new(args.alpha, args.count) {
        Ok(weights) => weights,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_BAD_FLAGS;
        }
    };
    let sums = weights.partial_sums();
    for (k, (&w, &s)) in weights.weights().iter().zip(sums.iter()).enumerate() {
        println!("{k} {w:.16e} {s:.16e}");
    }
    0
}

fn cmd_deriv(args: &DerivArgs) -> i32 {
    if !(args.monomial.is_finite() && args.monomial >= 0.0) {
        eprintln!(
            "error: --monomial must be a nonnegative finite power, got {}",
            args.monomial
        );
        return EXIT_BAD_FLAGS;
    }
    if args.n < 2 {
        eprintln!("error: --n must be at least 2, got {}", args.n);
        return EXIT_BAD_FLAGS;
    }
    let weights = match GlWeights::new(args.alpha, args.n) {
        Ok(weights) => weights,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_BAD_FLAGS;
        }
    };
    let mesh = crate::assemble::Mesh::new(0.0, 1.0, args.n).expect("unit interval mesh");
    let p = args.monomial;
    let values: Vec<f64> = (0..=args.n).map(|i| mesh.node(i).powf(p)).collect();
    let samples = GridSamples::new(mesh.h(), values).expect("monomial samples are finite");
    let coef = gamma(p + 1.0).expect("positive argument")
        / gamma(p + 1.0 - args.alpha).expect("positive argument");

    let mut out = String::new();
    match args.side {
        Side::Left => {
            out.push_str("t,approx,exact,abs_err\n");
            for i in 0..=args.n {
                let t = mesh.node(i);
                let approx = gl_left(&samples, &weights, i).expect("index in range");
                let exact = coef * t.powf(p - args.alpha);
                let _ = writeln!(
                    out,
                    "{t:.16e},{approx:.16e},{exact:.16e},{:.16e}",
                    (approx - exact).abs()
                );
            }
        }
        Side::Right => {
            out.push_str("t,approx\n");
            for i in 0..=args.n {
                let t = mesh.node(i);
                let approx = gl_right(&samples, &weights, i).expect("index in range");
                let _ = writeln!(out, "{t:.16e},{approx:.16e}");
            }
        }
        Side::Shifted => {
            out.push_str("t,approx\n");
            for i in 0..args.n {
                let t = mesh.node(i);
                let approx = gl_left_shifted(&samples, &weights, i).expect("index below n");
                let _ = writeln!(out, "{t:.16e},{approx:.16e}");
            }
        }
    }
    print!("{out}");
    0
}
