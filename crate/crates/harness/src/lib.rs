//! Experiments, file formats and the command-line interface on top of the
//! `ellipcenters` solvers.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod problem_io;

pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentResult, ExperimentSpec, ProblemKind, SolverRun};
