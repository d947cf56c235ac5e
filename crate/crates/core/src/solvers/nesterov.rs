use alloc::vec;

use super::{IterateRecord, RunStatus, RunTrace, SolverConfig, SolverId, TraceBuilder};
use crate::error::{check_dim, Result};
use crate::linalg::norm;
use crate::objectives::{Counted, Objective};

/// Constant momentum `(sqrt(kappa) - 1) / (sqrt(kappa) + 1)`.
pub fn momentum(kappa: f64) -> f64 {
    let r = libm::sqrt(kappa);
    (r - 1.0) / (r + 1.0)
}

/// Nesterov's accelerated gradient, constant-momentum strongly convex form:
/// `x^{k+1} = z^k - grad f(z^k) / L`,
/// `z^{k+1} = x^{k+1} + m (x^{k+1} - x^k)`, `z^1 = x^1`.
///
/// The stopping test needs `grad f(x^k)` in addition to `grad f(z^k)`; those
/// monitoring calls appear only in `grad_evals_total`. `f` is not monotone
/// along the iterates.
pub fn run_fast_gd<O: Objective + ?Sized>(
    f: &O,
    x1: &[f64],
    cfg: &SolverConfig,
) -> Result<RunTrace> {
    check_dim(f.dim(), x1.len())?;
    cfg.validate()?;
    let f = Counted::new(f);
    let n = x1.len();
    let inv_l = 1.0 / f.lip();
    let m = momentum(f.kappa());
    let mut tb = TraceBuilder::new(SolverId::FastGd, cfg, x1);

    let mut x = x1.to_vec();
    let mut z = x1.to_vec();
    let mut gx = vec![0.0; n];
    let mut gz = vec![0.0; n];
    let mut x_next = vec![0.0; n];
    let mut fx = f.value_gradient_into(&x, &mut gx);
    let mut k = 1u32;
    loop {
        let grad_norm = norm(&gx);
        let rec = IterateRecord::new(k, fx, grad_norm, k as u64 - 1, f.counts());
        tb.push(rec, &x);
        if grad_norm <= cfg.eps {
            return Ok(tb.finish(RunStatus::Converged, None, x));
        }
        if k > cfg.max_outer {
            return Ok(tb.finish(RunStatus::MaxIterations, None, x));
        }
        if k == 1 {
            gz.copy_from_slice(&gx);
        } else {
            f.gradient_into(&z, &mut gz);
        }
        for i in 0..n {
            x_next[i] = z[i] - inv_l * gz[i];
        }
        for i in 0..n {
            z[i] = x_next[i] + m * (x_next[i] - x[i]);
        }
        core::mem::swap(&mut x, &mut x_next);
        fx = f.value_gradient_into(&x, &mut gx);
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::QuadraticProblem;
    use crate::solvers::{run_gd_l, SolverId};

    #[test]
    fn unit_kappa_is_plain_gradient_descent() {
        assert_eq!(momentum(1.0), 0.0);
        let q = QuadraticProblem::diagonal(&[2.0, 2.0], vec![1.0, -3.0], 0.5).unwrap();
        let cfg = SolverConfig::default();
        let a = run_fast_gd(&q, &[4.0, 4.0], &cfg).unwrap();
        let b = run_gd_l(&q, &[4.0, 4.0], &cfg).unwrap();
        assert_eq!(a.x_final, b.x_final);
        assert_eq!(a.iterations(), b.iterations());
    }

    #[test]
    fn beats_gd_l_on_ill_conditioned_quadratic() {
        let q = QuadraticProblem::random_spd(50, 100.0, 5).unwrap();
        let x1 = vec![0.0; 50];
        let cfg = SolverConfig::default();
        let fast = run_fast_gd(&q, &x1, &cfg).unwrap();
        let slow = run_gd_l(&q, &x1, &cfg).unwrap();
        assert_eq!(fast.status, RunStatus::Converged);
        assert!(fast.grad_evals_outer() < slow.grad_evals_outer());
    }

    #[test]
    fn momentum_makes_f_non_monotone() {
        // kappa = 100; the error starts outside the slowest (critically damped) mode
        let q = QuadraticProblem::diagonal(&[1.0, 5.0, 100.0], vec![0.0, 5.0, 100.0], 0.0).unwrap();
        let t = run_fast_gd(&q, &[0.0; 3], &SolverConfig::default()).unwrap();
        assert_eq!(t.status, RunStatus::Converged);
        assert!(t.records.windows(2).any(|w| w[1].f_val > w[0].f_val));
        assert!(!SolverId::FastGd.is_monotone());
    }
}
