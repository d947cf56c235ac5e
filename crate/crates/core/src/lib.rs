//! Method of Ellipcenters for smooth strongly convex minimization, with
//! gradient-descent and Nesterov baselines and post-hoc rate certification.
//!
//! `no_std` with `alloc`.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod companion;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod objectives;
pub mod plane2d;
pub mod reference;
pub mod solvers;

pub use error::{Error, Result};
pub use objectives::{Counted, LogRegProblem, Objective, Problem, QuadraticProblem};
#[cfg(test)]
mod testutil;
