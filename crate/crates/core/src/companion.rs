//! Companion point `y = x - t grad f(x)` on the level set `{f = f(x)}`.
//!
//! Along the ray `g(t) = f(x - t v)` with `v = grad f(x)`, strong convexity
//! gives exactly one positive root of `g(t) = g(0)`. Quadratics have it in
//! closed form; everything else is bracketed by doubling and bisected.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::norm_sq;
use crate::objectives::{Objective, QuadraticProblem};

const MAX_BRACKET_STEPS: u32 = 200;
const MAX_BISECTION_ITERS: u32 = 200;
const BRACKET_WIDTH_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct CompanionResult {
    /// Step along `-v`; always positive.
    pub t: f64,
    pub y: Vec<f64>,
    /// `f(y)`
    pub value: f64,
    /// `|f(y) - f(x)| / max(1, |f(x)|)`
    pub level_residual: f64,
    pub bisection_iters: u32,
    /// Objective-value evaluations consumed (not counting `f(x)`).
    pub eval_count: u32,
}

/// Interval with `g(t_lo) < g(0) <= g(t_hi)` and `0 < t_lo < t_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub t_lo: f64,
    pub t_hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
    pub evals: u32,
}

/// Default first probe: `2/L` when the objective knows `L`, else `1`.
pub fn default_t_init<O: Objective + ?Sized>(f: &O) -> f64 {
    let lip = f.lip();
    if lip.is_finite() && lip > 0.0 {
        2.0 / lip
    } else {
        1.0
    }
}

fn ray_value<O: Objective + ?Sized>(f: &O, x: &[f64], v: &[f64], t: f64, buf: &mut [f64]) -> f64 {
    for i in 0..x.len() {
        buf[i] = x[i] - t * v[i];
    }
    f.value(buf)
}

/// Doubling search for a right bracket of the companion step.
///
/// When the first probe already lies above the level, the probe is halved
/// until a sub-level point is found instead.
pub fn bracket_right<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    v: &[f64],
    t_init: f64,
) -> Result<Bracket> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), v.len())?;
    let g0 = f.value(x);
    bracket_from(f, x, g0, v, t_init)
}

fn bracket_from<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    g0: f64,
    v: &[f64],
    t_init: f64,
) -> Result<Bracket> {
    if !(norm_sq(v) > 0.0) {
        return Err(Error::InvalidArgument("direction is zero"));
    }
    if !(t_init > 0.0) || !t_init.is_finite() {
        return Err(Error::InvalidArgument("initial step must be positive"));
    }
    let mut buf = vec![0.0; x.len()];
    let mut evals = 0u32;
    let mut t = t_init;
    let mut g = ray_value(f, x, v, t, &mut buf);
    evals += 1;

    if g >= g0 {
        let (mut t_hi, mut g_hi) = (t, g);
        loop {
            if evals > MAX_BRACKET_STEPS {
                return Err(Error::NumericFailure("no sub-level point found by halving"));
            }
            t *= 0.5;
            g = ray_value(f, x, v, t, &mut buf);
            evals += 1;
            if g < g0 {
                return Ok(Bracket {
                    t_lo: t,
                    t_hi,
                    g_lo: g,
                    g_hi,
                    evals,
                });
            }
            t_hi = t;
            g_hi = g;
        }
    }

    let (mut t_lo, mut g_lo) = (t, g);
    loop {
        if evals > MAX_BRACKET_STEPS {
            return Err(Error::NumericFailure(
                "doubling did not leave the sub-level set",
            ));
        }
        t *= 2.0;
        g = ray_value(f, x, v, t, &mut buf);
        evals += 1;
        if !g.is_finite() {
            return Err(Error::NumericFailure(
                "objective overflowed while bracketing",
            ));
        }
        if g >= g0 {
            return Ok(Bracket {
                t_lo,
                t_hi: t,
                g_lo,
                g_hi: g,
                evals,
            });
        }
        t_lo = t;
        g_lo = g;
    }
}

/// Closed-form companion step for a quadratic: `t = 2 |v|^2 / (v^T A v)`.
pub fn companion_t_quadratic(p: &QuadraticProblem, v: &[f64]) -> Result<f64> {
    check_dim(p.dim(), v.len())?;
    let vv = norm_sq(v);
    if !(vv > 0.0) {
        return Err(Error::InvalidArgument("direction is zero"));
    }
    let vav = p.curvature(v, v);
    if !(vav > 0.0) {
        return Err(Error::InvalidArgument(
            "v^T A v <= 0: matrix is not positive definite",
        ));
    }
    Ok(2.0 * vv / vav)
}

/// Locates the companion point of `x` for `v = grad f(x)`.
///
/// Uses the closed form when `f` exposes quadratic structure, otherwise
/// bracketing from [`default_t_init`] followed by bisection.
pub fn companion_point<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    v: &[f64],
    tol: f64,
) -> Result<CompanionResult> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), v.len())?;
    let fx = f.value(x);
    companion_point_from(f, x, fx, v, tol, default_t_init(f))
}

/// Same as [`companion_point`] with `f(x)` already known and an explicit
/// first probe for the bracket.
pub fn companion_point_from<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    fx: f64,
    v: &[f64],
    tol: f64,
    t_init: f64,
) -> Result<CompanionResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(
            "companion tolerance must be positive",
        ));
    }
    let scale = libm::fabs(fx).max(1.0);
    if let Some(q) = f.quadratic() {
        let t = companion_t_quadratic(q, v)?;
        let y = step(x, v, t);
        let value = f.value(&y);
        return Ok(CompanionResult {
            t,
            level_residual: libm::fabs(value - fx) / scale,
            y,
            value,
            bisection_iters: 0,
            eval_count: 1,
        });
    }
    let bracket = bracket_from(f, x, fx, v, t_init)?;
    bisect(f, x, fx, v, tol, bracket)
}

/// Bisection on a bracket from [`bracket_right`], keeping
/// `g(lo) < g(0) <= g(hi)`.
pub fn bisect<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    fx: f64,
    v: &[f64],
    tol: f64,
    bracket: Bracket,
) -> Result<CompanionResult> {
    let scale = libm::fabs(fx).max(1.0);
    let residual = |g: f64| libm::fabs(g - fx) / scale;
    let mut buf = vec![0.0; x.len()];
    let Bracket {
        t_lo: mut lo,
        t_hi: mut hi,
        g_lo: mut glo,
        g_hi: mut ghi,
        evals,
    } = bracket;
    let mut evals = evals;
    let mut iters = 0u32;

    let finish = |t: f64, g: f64, iters: u32, evals: u32| CompanionResult {
        t,
        y: step(x, v, t),
        value: g,
        level_residual: residual(g),
        bisection_iters: iters,
        eval_count: evals,
    };

    if residual(ghi) <= tol {
        return Ok(finish(hi, ghi, iters, evals));
    }
    while hi - lo > BRACKET_WIDTH_FLOOR * hi {
        if iters >= MAX_BISECTION_ITERS {
            return Err(Error::NumericFailure(
                "companion bisection did not converge",
            ));
        }
        let mid = 0.5 * (lo + hi);
        let gm = ray_value(f, x, v, mid, &mut buf);
        iters += 1;
        evals += 1;
        if residual(gm) <= tol {
            return Ok(finish(mid, gm, iters, evals));
        }
        if gm < fx {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    // Bracket collapsed: keep the better endpoint if it is within tolerance.
    let (t, g) = if residual(glo) <= residual(ghi) {
        (lo, glo)
    } else {
        (hi, ghi)
    };
    if residual(g) <= tol {
        Ok(finish(t, g, iters, evals))
    } else {
        Err(Error::NumericFailure(
            "companion bracket collapsed above tolerance",
        ))
    }
}

fn step(x: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(xi, vi)| xi - t * vi).collect()
}

/// Exact-linesearch step `|v|^2 / (v^T A v)` of a quadratic; half the companion step.
pub fn exact_step_quadratic(p: &QuadraticProblem, v: &[f64]) -> Result<f64> {
    Ok(0.5 * companion_t_quadratic(p, v)?)
}
