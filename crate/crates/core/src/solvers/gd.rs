use alloc::vec;
use alloc::vec::Vec;

use super::{IterateRecord, RunStatus, RunTrace, SolverConfig, SolverId, TraceBuilder};
use crate::companion::exact_step_quadratic;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, norm_sq};
use crate::objectives::{Counted, Objective};

const MAX_SEARCH_STEPS: u32 = 200;

/// `x - (1/L) grad f(x)`
pub fn gd_fixed_step<O: Objective + ?Sized>(f: &O, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(f.dim(), x.len())?;
    let g = f.gradient(x);
    let inv_l = 1.0 / f.lip();
    Ok(x.iter().zip(&g).map(|(xi, gi)| xi - inv_l * gi).collect())
}

/// Result of an exact linesearch along `-grad f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactStep {
    pub x_next: Vec<f64>,
    pub t_star: f64,
    pub f_next: f64,
    pub grad_next: Vec<f64>,
}

/// Exact linesearch step from `x`.
pub fn gd_exact_step<O: Objective + ?Sized>(f: &O, x: &[f64]) -> Result<ExactStep> {
    check_dim(f.dim(), x.len())?;
    let v = f.gradient(x);
    if !(norm_sq(&v) > 0.0) {
        return Err(Error::InvalidArgument("x is stationary"));
    }
    gd_exact_from(f, x, &v)
}

/// Root of `phi(t) = <grad f(x - t v), v>` by doubling and bisection, stopping
/// at `|phi| <= 1e-12 |v|^2`; closed form `|v|^2 / (v^T A v)` for quadratics.
pub(crate) fn gd_exact_from<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    v: &[f64],
) -> Result<ExactStep> {
    let n = x.len();
    let mut point = vec![0.0; n];
    let mut grad = vec![0.0; n];
    // slope of t -> f(x - t v), i.e. -<grad f(x - t v), v>
    let probe = |t: f64, point: &mut Vec<f64>, grad: &mut Vec<f64>| -> (f64, f64) {
        for i in 0..n {
            point[i] = x[i] - t * v[i];
        }
        let fv = f.value_gradient_into(point, grad);
        (-dot(grad, v), fv)
    };

    if let Some(q) = f.quadratic() {
        let t = exact_step_quadratic(q, v)?;
        let (_, fv) = probe(t, &mut point, &mut grad);
        return Ok(ExactStep {
            x_next: point,
            t_star: t,
            f_next: fv,
            grad_next: grad,
        });
    }

    let vv = norm_sq(v);
    let target = 1e-12 * vv;
    let mut t = 1.0 / f.lip();
    let (mut phi, mut fv) = probe(t, &mut point, &mut grad);
    let mut steps = 1u32;
    let mut best = (libm::fabs(phi), t, fv, point.clone(), grad.clone());
    let keep_best = |best: &mut (f64, f64, f64, Vec<f64>, Vec<f64>),
                     phi: f64,
                     t: f64,
                     fv: f64,
                     p: &[f64],
                     g: &[f64]| {
        if libm::fabs(phi) < best.0 {
            *best = (libm::fabs(phi), t, fv, p.to_vec(), g.to_vec());
        }
    };
    if libm::fabs(phi) <= target {
        return Ok(ExactStep {
            x_next: point,
            t_star: t,
            f_next: fv,
            grad_next: grad,
        });
    }
    // The slope starts at -|v|^2 and increases.
    let (mut lo, mut hi);
    if phi < 0.0 {
        lo = t;
        loop {
            if steps > MAX_SEARCH_STEPS {
                return Err(Error::NumericFailure("linesearch bracket not found"));
            }
            t *= 2.0;
            (phi, fv) = probe(t, &mut point, &mut grad);
            steps += 1;
            if !phi.is_finite() {
                return Err(Error::NumericFailure("objective overflowed in linesearch"));
            }
            keep_best(&mut best, phi, t, fv, &point, &grad);
            if phi >= 0.0 {
                hi = t;
                break;
            }
            lo = t;
        }
    } else {
        hi = t;
        loop {
            if steps > MAX_SEARCH_STEPS {
                return Err(Error::NumericFailure("linesearch bracket not found"));
            }
            t *= 0.5;
            (phi, fv) = probe(t, &mut point, &mut grad);
            steps += 1;
            keep_best(&mut best, phi, t, fv, &point, &grad);
            if phi < 0.0 {
                lo = t;
                break;
            }
            hi = t;
        }
    }
    let mut iters = 0u32;
    while best.0 > target && hi - lo > 1e-15 * hi {
        if iters >= MAX_SEARCH_STEPS {
            return Err(Error::NumericFailure(
                "linesearch bisection did not converge",
            ));
        }
        let mid = 0.5 * (lo + hi);
        (phi, fv) = probe(mid, &mut point, &mut grad);
        iters += 1;
        keep_best(&mut best, phi, mid, fv, &point, &grad);
        if phi < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // A collapsed bracket means phi is at rounding level; keep the best probe.
    let (_, t_star, f_next, x_next, grad_next) = best;
    Ok(ExactStep {
        x_next,
        t_star,
        f_next,
        grad_next,
    })
}

fn run_gradient_method<O, S>(
    solver: SolverId,
    f: &O,
    x1: &[f64],
    cfg: &SolverConfig,
    mut step: S,
) -> Result<RunTrace>
where
    O: Objective + ?Sized,
    S: FnMut(&Counted<&O>, &[f64], &[f64]) -> Result<(Vec<f64>, f64, Vec<f64>, Option<f64>)>,
{
    check_dim(f.dim(), x1.len())?;
    cfg.validate()?;
    let f = Counted::new(f);
    let mut tb = TraceBuilder::new(solver, cfg, x1);
    let mut x = x1.to_vec();
    let mut g = vec![0.0; x.len()];
    let mut fx = f.value_gradient_into(&x, &mut g);
    let mut k = 1u32;
    loop {
        let grad_norm = norm(&g);
        let mut rec = IterateRecord::new(k, fx, grad_norm, k as u64 - 1, f.counts());
        if grad_norm <= cfg.eps {
            tb.push(rec, &x);
            return Ok(tb.finish(RunStatus::Converged, None, x));
        }
        if k > cfg.max_outer {
            tb.push(rec, &x);
            return Ok(tb.finish(RunStatus::MaxIterations, None, x));
        }
        match step(&f, &x, &g) {
            Ok((x_next, f_next, g_next, t)) => {
                rec.t_k = t;
                tb.push(rec, &x);
                x = x_next;
                fx = f_next;
                g = g_next;
                k += 1;
            }
            Err(e) => {
                tb.push(rec, &x);
                return Ok(tb.finish(RunStatus::from_error(&e), Some(e), x));
            }
        }
    }
}

/// Gradient descent with constant step `1/L`.
pub fn run_gd_l<O: Objective + ?Sized>(f: &O, x1: &[f64], cfg: &SolverConfig) -> Result<RunTrace> {
    let inv_l = 1.0 / f.lip();
    run_gradient_method(SolverId::GdL, f, x1, cfg, |f, x, g| {
        let x_next: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - inv_l * gi).collect();
        let mut g_next = vec![0.0; x.len()];
        let f_next = f.value_gradient_into(&x_next, &mut g_next);
        Ok((x_next, f_next, g_next, None))
    })
}

/// Gradient descent with exact linesearch.
pub fn run_gd_exact<O: Objective + ?Sized>(
    f: &O,
    x1: &[f64],
    cfg: &SolverConfig,
) -> Result<RunTrace> {
    run_gradient_method(SolverId::GdExact, f, x1, cfg, |f, x, g| {
        let s = gd_exact_from(f, x, g)?;
        Ok((s.x_next, s.f_next, s.grad_next, Some(s.t_star)))
    })
}
