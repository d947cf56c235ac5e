//! Objective abstraction and the two concrete problem families.

mod logreg;
mod quadratic;

pub use logreg::{generate_logreg, mu_for_kappa, smoothness_bound, LogRegProblem};
pub use quadratic::QuadraticProblem;

use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use crate::error::{check_dim, Result};

/// A differentiable, `mu`-strongly convex, `lip`-smooth function on `R^dim`.
///
/// Implementations are immutable after construction, so evaluation is pure
/// and may be shared across threads.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Strong-convexity modulus.
    fn mu(&self) -> f64;

    /// Lipschitz constant of the gradient.
    fn lip(&self) -> f64;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    /// Value and gradient in one pass; writes the gradient into `out`.
    fn value_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.gradient_into(x, out);
        self.value(x)
    }

    /// Exact quadratic structure, when the objective has it.
    fn quadratic(&self) -> Option<&QuadraticProblem> {
        None
    }

    fn kappa(&self) -> f64 {
        self.lip() / self.mu()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g);
        g
    }

    /// Checked evaluation: rejects a point of the wrong length.
    fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim(), x.len())?;
        let mut g = vec![0.0; self.dim()];
        let v = self.value_gradient_into(x, &mut g);
        Ok((v, g))
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn mu(&self) -> f64 {
        (**self).mu()
    }
    fn lip(&self) -> f64 {
        (**self).lip()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient_into(x, out)
    }
    fn value_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        (**self).value_gradient_into(x, out)
    }
    fn quadratic(&self) -> Option<&QuadraticProblem> {
        (**self).quadratic()
    }
}

/// Evaluation counts accumulated by [`Counted`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub values: u64,
    pub gradients: u64,
}

/// Wraps an objective and counts every value and gradient call.
///
/// A combined value+gradient call counts once in each counter.
#[derive(Debug)]
pub struct Counted<O> {
    inner: O,
    values: Cell<u64>,
    gradients: Cell<u64>,
}

impl<O: Objective> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            values: Cell::new(0),
            gradients: Cell::new(0),
        }
    }

    pub fn counts(&self) -> EvalCounts {
        EvalCounts {
            values: self.values.get(),
            gradients: self.gradients.get(),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn mu(&self) -> f64 {
        self.inner.mu()
    }
    fn lip(&self) -> f64 {
        self.inner.lip()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.values.set(self.values.get() + 1);
        self.inner.value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.gradients.set(self.gradients.get() + 1);
        self.inner.gradient_into(x, out)
    }
    fn value_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.values.set(self.values.get() + 1);
        self.gradients.set(self.gradients.get() + 1);
        self.inner.value_gradient_into(x, out)
    }
    fn quadratic(&self) -> Option<&QuadraticProblem> {
        self.inner.quadratic()
    }
}

/// Either problem family, for code that picks one at runtime.
#[derive(Debug, Clone)]
pub enum Problem {
    Quadratic(QuadraticProblem),
    LogReg(LogRegProblem),
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        match self {
            Problem::Quadratic(p) => p.dim(),
            Problem::LogReg(p) => p.dim(),
        }
    }
    fn mu(&self) -> f64 {
        match self {
            Problem::Quadratic(p) => p.mu(),
            Problem::LogReg(p) => p.mu(),
        }
    }
    fn lip(&self) -> f64 {
        match self {
            Problem::Quadratic(p) => p.lip(),
            Problem::LogReg(p) => p.lip(),
        }
    }
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Problem::Quadratic(p) => p.value(x),
            Problem::LogReg(p) => p.value(x),
        }
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Problem::Quadratic(p) => p.gradient_into(x, out),
            Problem::LogReg(p) => p.gradient_into(x, out),
        }
    }
    fn value_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        match self {
            Problem::Quadratic(p) => p.value_gradient_into(x, out),
            Problem::LogReg(p) => p.value_gradient_into(x, out),
        }
    }
    fn quadratic(&self) -> Option<&QuadraticProblem> {
        match self {
            Problem::Quadratic(p) => Some(p),
            Problem::LogReg(_) => None,
        }
    }
}

/// Seeded generator used for every synthetic instance (ChaCha8).
pub type InstanceRng = rand_chacha::ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64) -> InstanceRng {
    use rand_core::SeedableRng;
    InstanceRng::seed_from_u64(seed)
}

pub(crate) fn standard_normal(rng: &mut InstanceRng) -> f64 {
    use rand_distr::Distribution;
    rand_distr::StandardNormal.sample(rng)
}

/// `count` i.i.d. standard normal draws from a fresh generator seeded with `seed`.
pub fn gaussian_vector(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| standard_normal(&mut rng)).collect()
}
