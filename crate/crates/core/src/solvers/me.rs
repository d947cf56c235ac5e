use alloc::vec;
use alloc::vec::Vec;

use super::{IterateRecord, RunStatus, RunTrace, SolverConfig, SolverId, TraceBuilder};
use crate::companion::{companion_point_from, default_t_init, CompanionResult};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist_sq, dot, norm, norm_sq};
use crate::objectives::{Counted, Objective};
use crate::plane2d::{
    segment_minimizer, solve_gd_armijo_with, solve_newton_quadratic, PlaneSubproblem,
};

/// Inner products at the new iterate of a linearly independent ME step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGeometry {
    /// `<grad f(x^{k+1}), v^k>`
    pub orth_v: f64,
    /// `<grad f(x^{k+1}), w^k>`
    pub orth_w: f64,
    pub v_norm: f64,
    pub w_norm: f64,
    /// `|grad f(x^{k+1})|`
    pub next_grad_norm: f64,
    /// `|x^{k+1} - x^k|`
    pub step_norm: f64,
    /// `|grad f(x^{k+1}) - v|^2 - |grad f(x^{k+1})|^2 - |v|^2`, zero under exact orthogonality.
    pub pythagoras_defect: f64,
}

impl StepGeometry {
    pub fn from_vectors(g_next: &[f64], v: &[f64], w: &[f64], x: &[f64], x_next: &[f64]) -> Self {
        let gg = norm_sq(g_next);
        let vv = norm_sq(v);
        let diff: f64 = g_next.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        Self {
            orth_v: dot(g_next, v),
            orth_w: dot(g_next, w),
            v_norm: libm::sqrt(vv),
            w_norm: norm(w),
            next_grad_norm: libm::sqrt(gg),
            step_norm: libm::sqrt(dist_sq(x, x_next)),
            pythagoras_defect: diff - gg - vv,
        }
    }
}

/// Outcome of one ME iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MeStep {
    pub x_next: Vec<f64>,
    pub f_next: f64,
    pub grad_next: Vec<f64>,
    pub companion: CompanionResult,
    pub sin2_theta: f64,
    /// Linearly independent branch taken.
    pub li: bool,
    pub inner_iters: u32,
    /// Present on linearly independent steps.
    pub geometry: Option<StepGeometry>,
}

/// One iteration of the Method of Ellipcenters from `x`.
pub fn me_step<O: Objective + ?Sized>(f: &O, x: &[f64], cfg: &SolverConfig) -> Result<MeStep> {
    check_dim(f.dim(), x.len())?;
    let mut v = vec![0.0; x.len()];
    let fx = f.value_gradient_into(x, &mut v);
    if !(norm_sq(&v) > 0.0) {
        return Err(Error::InvalidArgument("x is stationary"));
    }
    me_step_from(f, x, fx, &v, cfg)
}

pub(crate) fn me_step_from<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    fx: f64,
    v: &[f64],
    cfg: &SolverConfig,
) -> Result<MeStep> {
    // Step 2: companion point on the level set through x.
    let companion = companion_point_from(f, x, fx, v, cfg.companion_tol, default_t_init(f))?;
    let w = f.gradient(&companion.y);
    let sp = PlaneSubproblem::new(x, v, &w, f.lip())?;
    let sin2_theta = sp.sin2_theta;

    // Step 3 (LI): minimize over the plane.
    if sin2_theta >= cfg.ld_threshold {
        let solved = match f.quadratic() {
            Some(q) => solve_newton_quadratic(q, &sp),
            None => solve_gd_armijo_with(f, &sp, cfg.inner_tol, cfg.max_inner, &cfg.armijo),
        };
        match solved {
            Ok(sol) => {
                let (f_next, grad_next) = match sol.next {
                    Some(next) => next,
                    None => {
                        let mut g = vec![0.0; x.len()];
                        let fv = f.value_gradient_into(&sol.x_next, &mut g);
                        (fv, g)
                    }
                };
                let geometry = StepGeometry::from_vectors(&grad_next, v, &w, x, &sol.x_next);
                return Ok(MeStep {
                    x_next: sol.x_next,
                    f_next,
                    grad_next,
                    companion,
                    sin2_theta,
                    li: true,
                    inner_iters: sol.inner_iters,
                    geometry: Some(geometry),
                });
            }
            Err(Error::DegeneratePlane) => {}
            Err(e) => return Err(e),
        }
    }

    // Step 3 (LD): minimize along the segment [x, y].
    let seg = segment_minimizer(f, x, &companion.y)?;
    let mut grad_next = vec![0.0; x.len()];
    let f_next = f.value_gradient_into(&seg.point, &mut grad_next);
    Ok(MeStep {
        x_next: seg.point,
        f_next,
        grad_next,
        companion,
        sin2_theta,
        li: false,
        inner_iters: 0,
        geometry: None,
    })
}

/// Runs ME from `x1` until `|grad f| <= eps` or `max_outer` steps.
pub fn run_me<O: Objective + ?Sized>(f: &O, x1: &[f64], cfg: &SolverConfig) -> Result<RunTrace> {
    check_dim(f.dim(), x1.len())?;
    cfg.validate()?;
    let f = Counted::new(f);
    let mut tb = TraceBuilder::new(SolverId::Me, cfg, x1);
    let mut x = x1.to_vec();
    let mut g = vec![0.0; x.len()];
    let mut fx = f.value_gradient_into(&x, &mut g);
    let mut k = 1u32;
    loop {
        let grad_norm = norm(&g);
        let mut rec = IterateRecord::new(k, fx, grad_norm, 2 * (k as u64 - 1), f.counts());
        if grad_norm <= cfg.eps {
            tb.push(rec, &x);
            return Ok(tb.finish(RunStatus::Converged, None, x));
        }
        if k > cfg.max_outer {
            tb.push(rec, &x);
            return Ok(tb.finish(RunStatus::MaxIterations, None, x));
        }
        match me_step_from(&f, &x, fx, &g, cfg) {
            Ok(step) => {
                rec.t_k = Some(step.companion.t);
                rec.sin2_theta = Some(step.sin2_theta);
                rec.li_flag = Some(step.li);
                rec.geometry = step.geometry;
                tb.push(rec, &x);
                x = step.x_next;
                fx = step.f_next;
                g = step.grad_next;
                k += 1;
            }
            Err(e) => {
                tb.push(rec, &x);
                return Ok(tb.finish(RunStatus::from_error(&e), Some(e), x));
            }
        }
    }
}
