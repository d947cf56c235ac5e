use crate::objectives::{Objective, QuadraticProblem};

/// Hides the quadratic structure so the general-purpose code paths run.
pub(crate) struct Opaque<'a>(pub &'a QuadraticProblem);

impl Objective for Opaque<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn mu(&self) -> f64 {
        self.0.mu()
    }
    fn lip(&self) -> f64 {
        self.0.lip()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.0.gradient_into(x, out)
    }
}
