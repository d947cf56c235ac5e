//! Command-line front end.

use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ellipcenters::solvers::SolverId;

use crate::config::FileConfig;
use crate::error::{io_err, HarnessError};
use crate::experiment::{run_experiment, ExperimentResult, ExperimentSpec, ProblemKind};
use crate::output::{render_summary_table, write_audit_csv};
use crate::problem_io::write_problem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER_FAILURE: i32 = 1;
pub const EXIT_AUDIT_FAILURE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "ellipcenters",
    version,
    about = "Method of Ellipcenters experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment (default solver: me).
    Run(ExperimentArgs),
    /// Run several solvers on one instance and print the comparison table (default: all).
    Compare(ExperimentArgs),
    /// Run all solvers and audit the ME trace against its guarantees.
    Verify(ExperimentArgs),
    /// Write a problem instance file (to --out, or stdout).
    Gen(ExperimentArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// quadratic or logreg [default: logreg]
    #[arg(long)]
    problem: Option<ProblemKind>,
    /// Dimension [default: 100]
    #[arg(long)]
    n: Option<usize>,
    /// Logistic samples [default: n/2]
    #[arg(long)]
    m: Option<usize>,
    /// Condition number, > 1 [default: 10]
    #[arg(long)]
    kappa: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// me, gd-l, gd-exact or fast-gd; repeatable
    #[arg(long = "solver")]
    solvers: Vec<SolverId>,
    /// Gradient-norm stopping tolerance [default: 1e-6]
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_outer: Option<u32>,
    /// Output directory (for `gen`: output file)
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with the same keys as the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidSpec(_)
            | HarnessError::Config(_)
            | HarnessError::Core(ellipcenters::Error::InvalidArgument(_)) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl ExperimentArgs {
    fn into_spec(self, default_solvers: &[SolverId]) -> Result<ExperimentSpec, Failure> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let problem = match (self.problem, file.problem) {
            (Some(p), _) => p,
            (None, Some(s)) => s.parse().map_err(Failure::Usage)?,
            (None, None) => ProblemKind::Logreg,
        };
        let mut solvers = self.solvers;
        if solvers.is_empty() {
            if let Some(names) = file.solvers {
                solvers = names
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|e: ellipcenters::Error| Failure::Usage(e.to_string()))?;
            }
        }
        if solvers.is_empty() {
            solvers = default_solvers.to_vec();
        }
        let mut spec = ExperimentSpec::new(
            problem,
            self.n.or(file.n).unwrap_or(100),
            self.kappa.or(file.kappa).unwrap_or(10.0),
            self.seed.or(file.seed).unwrap_or(0),
        );
        spec.m = self.m.or(file.m);
        spec.solvers = solvers;
        let cfg = &mut spec.config;
        if let Some(v) = self.eps.or(file.eps) {
            cfg.eps = v;
        }
        if let Some(v) = self.max_outer.or(file.max_outer) {
            cfg.max_outer = v;
        }
        if let Some(v) = file.companion_tol {
            cfg.companion_tol = v;
        }
        if let Some(v) = file.inner_tol {
            cfg.inner_tol = v;
        }
        if let Some(v) = file.max_inner {
            cfg.max_inner = v;
        }
        spec.output_dir = self.out.or(file.out);
        spec.validate()?;
        Ok(spec)
    }
}

fn report_run(res: &ExperimentResult, out: &mut impl Write) -> std::io::Result<()> {
    write!(out, "{}", render_summary_table(&res.summary_rows()))?;
    for w in res.warnings() {
        writeln!(out, "{w}")?;
    }
    Ok(())
}

fn execute(cmd: Command, out: &mut impl Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    match cmd {
        Command::Run(args) => {
            let res = run_experiment(&args.into_spec(&[SolverId::Me])?)?;
            report_run(&res, out).map_err(io)?;
            Ok(if res.any_failure() {
                EXIT_SOLVER_FAILURE
            } else {
                EXIT_OK
            })
        }
        Command::Compare(args) => {
            let res = run_experiment(&args.into_spec(&SolverId::ALL)?)?;
            report_run(&res, out).map_err(io)?;
            Ok(if res.any_failure() {
                EXIT_SOLVER_FAILURE
            } else {
                EXIT_OK
            })
        }
        Command::Verify(args) => {
            let mut spec = args.into_spec(&SolverId::ALL)?;
            if !spec.solvers.contains(&SolverId::Me) {
                spec.solvers.insert(0, SolverId::Me);
            }
            spec.config.keep_iterates = true;
            let res = run_experiment(&spec)?;
            report_run(&res, out).map_err(io)?;
            if res.any_failure() {
                return Ok(EXIT_SOLVER_FAILURE);
            }
            let report = res.verify()?;
            writeln!(out).map_err(io)?;
            write!(out, "{}", report.render_text()).map_err(io)?;
            if let Some(dir) = &spec.output_dir {
                let path = dir.join("audit.csv");
                let f = std::fs::File::create(&path)
                    .map_err(io_err(path))
                    .map_err(Failure::from)?;
                write_audit_csv(BufWriter::new(f), &report)?;
            }
            Ok(if report.pass() {
                EXIT_OK
            } else {
                EXIT_AUDIT_FAILURE
            })
        }
        Command::Gen(args) => {
            let mut spec = args.into_spec(&[SolverId::Me])?;
            let target = spec.output_dir.take();
            let problem = spec.build_problem()?;
            match target {
                Some(path) => {
                    let f = std::fs::File::create(&path)
                        .map_err(io_err(path))
                        .map_err(Failure::from)?;
                    write_problem(BufWriter::new(f), &problem).map_err(io)?;
                }
                None => write_problem(&mut *out, &problem).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_SOLVER_FAILURE
        }
    }
}
