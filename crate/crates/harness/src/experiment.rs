//! Seeded experiments: instance, reference optimum, solver runs, outputs.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use ellipcenters::diagnostics::{
    audit_dominance, audit_orthogonality_trace, certify_rates, fill_ratios, Audit, AuditReport,
    DOMINANCE_SLACK,
};
use ellipcenters::objectives::generate_logreg;
use ellipcenters::reference::{compute_reference, ReferenceMethod, ReferenceSolution};
use ellipcenters::solvers::{run, RunStatus, RunTrace, SolverConfig, SolverId};
use ellipcenters::{Objective, Problem, QuadraticProblem};

use crate::error::{io_err, HarnessError, Result};
use crate::output::{fmt_f64, write_gap_series, write_summary_csv, write_trace_csv, SummaryRow};

/// Relative agreement required between final values of converged solvers.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Quadratic,
    Logreg,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Quadratic => "quadratic",
            ProblemKind::Logreg => "logreg",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quadratic" => Ok(ProblemKind::Quadratic),
            "logreg" => Ok(ProblemKind::Logreg),
            _ => Err(format!(
                "unknown problem `{s}` (expected quadratic or logreg)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemKind,
    pub n: usize,
    /// Logistic samples; `n / 2` when absent.
    pub m: Option<usize>,
    pub kappa: f64,
    pub seed: u64,
    pub solvers: Vec<SolverId>,
    pub config: SolverConfig,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    /// All four solvers, default configuration, no output directory.
    pub fn new(problem: ProblemKind, n: usize, kappa: f64, seed: u64) -> Self {
        Self {
            problem,
            n,
            m: None,
            kappa,
            seed,
            solvers: SolverId::ALL.to_vec(),
            config: SolverConfig::default(),
            output_dir: None,
        }
    }

    pub fn samples(&self) -> usize {
        self.m.unwrap_or((self.n / 2).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::InvalidSpec(m.to_string()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.kappa > 1.0 && self.kappa.is_finite()) {
            return bad("kappa must be a finite number greater than 1");
        }
        if self.m == Some(0) {
            return bad("m must be positive");
        }
        if self.solvers.is_empty() {
            return bad("no solver selected");
        }
        self.config.validate()?;
        Ok(())
    }

    pub fn build_problem(&self) -> Result<Problem> {
        self.validate()?;
        Ok(match self.problem {
            ProblemKind::Quadratic => {
                Problem::Quadratic(QuadraticProblem::random_spd(self.n, self.kappa, self.seed)?)
            }
            ProblemKind::Logreg => Problem::LogReg(generate_logreg(
                self.n,
                self.samples(),
                self.kappa,
                self.seed,
            )?),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub trace: RunTrace,
    pub wall: Duration,
}

impl SolverRun {
    pub fn failed(&self) -> bool {
        matches!(
            self.trace.status,
            RunStatus::InnerStall | RunStatus::NumericFailure
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub problem: Problem,
    pub reference: ReferenceSolution,
    /// Reference value lowered to the smallest value seen in any trace.
    pub f_star: f64,
    pub runs: Vec<SolverRun>,
}

/// Generates the instance, computes the reference and runs every solver
/// from the origin. Outputs are written when `spec.output_dir` is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let problem = spec.build_problem()?;
    run_on(spec, problem)
}

/// Like [`run_experiment`] on a given instance.
pub fn run_on(spec: &ExperimentSpec, problem: Problem) -> Result<ExperimentResult> {
    spec.config.validate()?;
    let reference = compute_reference(&problem)?;
    let x1 = vec![0.0; problem.dim()];
    let mut runs = Vec::with_capacity(spec.solvers.len());
    for &id in &spec.solvers {
        let mut cfg = spec.config.clone();
        cfg.keep_iterates &= id == SolverId::Me;
        let start = Instant::now();
        let trace = run(id, &problem, &x1, &cfg)?;
        runs.push(SolverRun {
            trace,
            wall: start.elapsed(),
        });
    }
    let f_star = runs
        .iter()
        .map(|r| r.trace.min_value())
        .fold(reference.f_star, f64::min);
    for r in &mut runs {
        fill_ratios(&mut r.trace, f_star)?;
    }
    let result = ExperimentResult {
        spec: spec.clone(),
        problem,
        reference,
        f_star,
        runs,
    };
    if let Some(dir) = &spec.output_dir {
        result.write_outputs(dir)?;
    }
    Ok(result)
}

impl ExperimentResult {
    pub fn run_for(&self, id: SolverId) -> Option<&SolverRun> {
        self.runs.iter().find(|r| r.trace.solver == id)
    }

    pub fn any_failure(&self) -> bool {
        self.runs.iter().any(SolverRun::failed)
    }

    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        self.runs
            .iter()
            .map(|r| {
                let last = r.trace.last();
                SummaryRow {
                    solver: r.trace.solver.to_string(),
                    n: self.problem.dim(),
                    kappa: self.problem.kappa(),
                    status: r.trace.status.to_string(),
                    iterations: r.trace.iterations(),
                    wall_ms: r.wall.as_secs_f64() * 1e3,
                    grad_evals_outer: last.grad_evals_outer,
                    grad_evals_total: last.grad_evals_total,
                    terminal_gap: last.f_val - self.f_star,
                    final_grad_norm: last.grad_norm,
                }
            })
            .collect()
    }

    /// Warnings about the reference optimum, if any.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.reference.is_inaccurate() {
            w.push(format!(
                "warning: reference gradient norm {:.3e} exceeds 1e-10; gaps below that level are unreliable",
                self.reference.residual
            ));
        }
        for r in &self.runs {
            if let Some(e) = &r.trace.failure {
                w.push(format!(
                    "{}: stopped with {}: {e}",
                    r.trace.solver, r.trace.status
                ));
            }
        }
        w
    }

    /// Writes `trace_<solver>.csv`, `gaps_<solver>.csv`, `summary.csv` and
    /// `reference.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let create = |name: String| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            Ok(BufWriter::new(File::create(&path).map_err(io_err(path))?))
        };
        for r in &self.runs {
            write_trace_csv(
                create(format!("trace_{}.csv", r.trace.solver))?,
                &r.trace,
                self.f_star,
            )?;
            write_gap_series(
                create(format!("gaps_{}.csv", r.trace.solver))?,
                &r.trace,
                self.f_star,
            )?;
        }
        write_summary_csv(create("summary.csv".into())?, &self.summary_rows())?;
        let mut wr = csv::Writer::from_writer(create("reference.csv".into())?);
        wr.write_record([
            "f_star",
            "reference_value",
            "residual",
            "method",
            "accurate",
        ])?;
        wr.write_record([
            fmt_f64(self.f_star),
            fmt_f64(self.reference.f_star),
            fmt_f64(self.reference.residual),
            match self.reference.method {
                ReferenceMethod::LinearSolve => "linear-solve".to_string(),
                ReferenceMethod::HighAccuracyRun => "high-accuracy-run".to_string(),
            },
            u8::from(!self.reference.is_inaccurate()).to_string(),
        ])?;
        wr.flush().map_err(io_err(dir))?;
        Ok(())
    }

    /// Full audit suite: rate certificate and orthogonality on the ME trace,
    /// per-step dominance along the ME path, and terminal consistency
    /// across converged solvers.
    pub fn verify(&self) -> Result<AuditReport> {
        let me = self
            .run_for(SolverId::Me)
            .ok_or_else(|| HarnessError::InvalidSpec("verification needs an ME run".into()))?;
        let p = &self.problem;
        let x_star = me
            .trace
            .iterates
            .as_ref()
            .map(|_| self.reference.x_star.as_slice());
        let (_, mut report) = certify_rates(&me.trace, self.f_star, p.mu(), p.lip(), x_star)?;
        report.merge(audit_orthogonality_trace(&me.trace, p.lip()));

        let cfg = &me.trace.config;
        let start = vec![0.0; p.dim()];
        let points: Vec<(u32, &[f64])> = match &me.trace.iterates {
            Some(xs) => xs
                .iter()
                .zip(&me.trace.records)
                .take(xs.len().saturating_sub(1))
                .map(|(x, r)| (r.k, x.as_slice()))
                .collect(),
            None => vec![(1, start.as_slice())],
        };
        for (k, x) in points {
            if p.gradient(x).iter().all(|&g| g == 0.0) {
                continue;
            }
            let d = audit_dominance(p, x, cfg)?;
            let slack = DOMINANCE_SLACK * p.value(x).abs().max(1.0);
            report.record(Audit::Dominance, k, d.f_me - d.f_gd, slack);
        }

        let f_me = me.trace.final_value();
        if me.trace.status == RunStatus::Converged {
            for r in self
                .runs
                .iter()
                .filter(|r| r.trace.status == RunStatus::Converged)
            {
                let f = r.trace.final_value();
                let scale = f.abs().max(f_me.abs()).max(1.0);
                report.record(
                    Audit::Consistency,
                    r.trace.last().k,
                    (f - f_me).abs(),
                    CONSISTENCY_TOL * scale,
                );
            }
        }
        Ok(report)
    }
}
