//! Outer algorithms: Method of Ellipcenters, gradient descent with step
//! `1/L`, gradient descent with exact linesearch, and Nesterov's method for
//! strongly convex objectives. All four share [`SolverConfig`] and emit a
//! [`RunTrace`].

mod gd;
mod me;
mod nesterov;

pub use gd::{gd_exact_step, gd_fixed_step, run_gd_exact, run_gd_l, ExactStep};
pub use me::{me_step, run_me, MeStep, StepGeometry};
pub use nesterov::{momentum, run_fast_gd};

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::objectives::{EvalCounts, Objective};
use crate::plane2d::ArmijoOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Outer stopping tolerance on `|grad f|`.
    pub eps: f64,
    pub max_outer: u32,
    /// Relative level tolerance of the companion bisection.
    pub companion_tol: f64,
    /// Inner plane-solver tolerance (scaled by `max(|v|, |w|)`).
    pub inner_tol: f64,
    pub max_inner: u32,
    /// `sin^2 theta` at or above this value counts as linearly independent.
    pub ld_threshold: f64,
    pub armijo: ArmijoOptions,
    /// Keep every iterate in the trace (needed for distance audits).
    pub keep_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_outer: 100_000,
            companion_tol: 1e-12,
            inner_tol: 1e-12,
            max_inner: 10_000,
            ld_threshold: 1e-12,
            armijo: ArmijoOptions::default(),
            keep_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.eps,
            self.companion_tol,
            self.inner_tol,
            self.ld_threshold,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidArgument("tolerances must be positive"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidArgument("iteration limits must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverId {
    Me,
    GdL,
    GdExact,
    FastGd,
}

impl SolverId {
    pub const ALL: [SolverId; 4] = [
        SolverId::Me,
        SolverId::GdExact,
        SolverId::GdL,
        SolverId::FastGd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverId::Me => "me",
            SolverId::GdL => "gd-l",
            SolverId::GdExact => "gd-exact",
            SolverId::FastGd => "fast-gd",
        }
    }

    /// Whether `f` is guaranteed to decrease along the iterates.
    pub fn is_monotone(self) -> bool {
        !matches!(self, SolverId::FastGd)
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "me" => Ok(SolverId::Me),
            "gd-l" | "gdl" => Ok(SolverId::GdL),
            "gd-exact" | "gdexact" => Ok(SolverId::GdExact),
            "fast-gd" | "fastgd" | "nesterov" => Ok(SolverId::FastGd),
            _ => Err(Error::InvalidArgument("unknown solver")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIterations,
    InnerStall,
    NumericFailure,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIterations => "max-iterations",
            RunStatus::InnerStall => "inner-stall",
            RunStatus::NumericFailure => "numeric-failure",
        }
    }

    pub(crate) fn from_error(e: &Error) -> Self {
        match e {
            Error::InnerStall { .. } => RunStatus::InnerStall,
            _ => RunStatus::NumericFailure,
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Telemetry for iterate `x^k` and the step taken from it.
///
/// Counters are cumulative and describe the work spent before the step from
/// `x^k`: for ME, `grad_evals_outer = 2 (k - 1)`; for the other solvers it is
/// `k - 1`. `grad_evals_total` counts every gradient call actually made,
/// including linesearch, inner-solver and monitoring calls.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    /// 1-based iterate index.
    pub k: u32,
    pub f_val: f64,
    pub grad_norm: f64,
    /// Companion step (ME) or linesearch step (GD-exact).
    pub t_k: Option<f64>,
    pub sin2_theta: Option<f64>,
    pub li_flag: Option<bool>,
    /// `(f(x^{k+1}) - f*) / (f(x^k) - f*)`, filled in after the run.
    pub ratio: Option<f64>,
    pub grad_evals_outer: u64,
    pub grad_evals_total: u64,
    pub value_evals_total: u64,
    /// Orthogonality data of an ME plane step.
    pub geometry: Option<StepGeometry>,
}

impl IterateRecord {
    pub(crate) fn new(k: u32, f_val: f64, grad_norm: f64, outer: u64, counts: EvalCounts) -> Self {
        Self {
            k,
            f_val,
            grad_norm,
            t_k: None,
            sin2_theta: None,
            li_flag: None,
            ratio: None,
            grad_evals_outer: outer,
            grad_evals_total: counts.gradients,
            value_evals_total: counts.values,
            geometry: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub solver: SolverId,
    pub records: Vec<IterateRecord>,
    pub status: RunStatus,
    /// Set when a step failed.
    pub failure: Option<Error>,
    pub x_final: Vec<f64>,
    pub config: SolverConfig,
    /// Every iterate, when `config.keep_iterates` is set.
    pub iterates: Option<Vec<Vec<f64>>>,
}

impl RunTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &IterateRecord {
        self.records
            .last()
            .expect("a trace always holds the starting point")
    }

    pub fn final_value(&self) -> f64 {
        self.last().f_val
    }

    pub fn min_value(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.f_val)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn grad_evals_outer(&self) -> u64 {
        self.last().grad_evals_outer
    }

    pub fn grad_evals_total(&self) -> u64 {
        self.last().grad_evals_total
    }
}

/// Runs `solver` from `x1`.
pub fn run<O: Objective + ?Sized>(
    solver: SolverId,
    f: &O,
    x1: &[f64],
    cfg: &SolverConfig,
) -> Result<RunTrace> {
    match solver {
        SolverId::Me => run_me(f, x1, cfg),
        SolverId::GdL => run_gd_l(f, x1, cfg),
        SolverId::GdExact => run_gd_exact(f, x1, cfg),
        SolverId::FastGd => run_fast_gd(f, x1, cfg),
    }
}

/// Shared bookkeeping for the outer loops.
pub(crate) struct TraceBuilder {
    trace: RunTrace,
}

impl TraceBuilder {
    pub(crate) fn new(solver: SolverId, cfg: &SolverConfig, x1: &[f64]) -> Self {
        Self {
            trace: RunTrace {
                solver,
                records: Vec::new(),
                status: RunStatus::MaxIterations,
                failure: None,
                x_final: x1.to_vec(),
                config: cfg.clone(),
                iterates: cfg.keep_iterates.then(Vec::new),
            },
        }
    }

    pub(crate) fn push(&mut self, record: IterateRecord, x: &[f64]) {
        self.trace.records.push(record);
        if let Some(it) = self.trace.iterates.as_mut() {
            it.push(x.to_vec());
        }
    }

    pub(crate) fn finish(
        mut self,
        status: RunStatus,
        failure: Option<Error>,
        x: Vec<f64>,
    ) -> RunTrace {
        self.trace.status = status;
        self.trace.failure = failure;
        self.trace.x_final = x;
        self.trace
    }
}
