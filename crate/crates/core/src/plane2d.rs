//! Minimization of `f` over the affine plane `{x + alpha v + beta w}`.
//!
//! `F(alpha, beta) = f(x + alpha v + beta w)` has gradient
//! `(<grad f(p), v>, <grad f(p), w>)`. Quadratics are solved by one Newton
//! step on the 2x2 system; general objectives by gradient descent with
//! Armijo backtracking.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, combine_into, dot, norm_sq, solve_sym2};
use crate::objectives::{Objective, QuadraticProblem};

/// Relative floor on `sin^2` of the angle between `v` and `w`, and on 2x2
/// determinants, below which the plane is treated as a line.
const SINGULAR_REL: f64 = 1e-14;

/// The plane through `base` spanned by `v = grad f(base)` and `w`.
///
/// Besides the spanning pair it carries an orthonormal basis `(u1, u2)` with
/// `u1 = v / |v|`; the inner solvers work in that basis, which stays well
/// conditioned when `v` and `w` are nearly parallel.
#[derive(Debug, Clone)]
pub struct PlaneSubproblem<'a> {
    pub base: &'a [f64],
    pub v: &'a [f64],
    pub w: &'a [f64],
    /// `[[<v,v>, <v,w>], [<w,v>, <w,w>]]`
    pub gram: [[f64; 2]; 2],
    /// `det(gram) / (|v|^2 |w|^2)`, clamped to `[0, 1]`.
    pub sin2_theta: f64,
    /// `L (|v|^2 + |w|^2)`, a Lipschitz bound for `grad F`.
    pub lip_bound: f64,
    basis: Option<Basis>,
}

#[derive(Debug, Clone)]
struct Basis {
    u1: Vec<f64>,
    u2: Vec<f64>,
    /// `w = w1 u1 + w2 u2`
    w1: f64,
    w2: f64,
}

impl<'a> PlaneSubproblem<'a> {
    pub fn new(base: &'a [f64], v: &'a [f64], w: &'a [f64], lip: f64) -> Result<Self> {
        check_dim(base.len(), v.len())?;
        check_dim(base.len(), w.len())?;
        let vv = norm_sq(v);
        let ww = norm_sq(w);
        let vw = dot(v, w);
        let sin2_theta = if vv > 0.0 && ww > 0.0 {
            ((vv * ww - vw * vw) / (vv * ww)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(Self {
            base,
            v,
            w,
            gram: [[vv, vw], [vw, ww]],
            sin2_theta,
            lip_bound: lip * (vv + ww),
            basis: Self::orthonormal_basis(v, w, vv, ww),
        })
    }

    /// Gram-Schmidt with one reorthogonalization pass.
    fn orthonormal_basis(v: &[f64], w: &[f64], vv: f64, ww: f64) -> Option<Basis> {
        if !(vv > 0.0 && ww > 0.0) {
            return None;
        }
        let vn = libm::sqrt(vv);
        let u1: Vec<f64> = v.iter().map(|x| x / vn).collect();
        let mut u2 = w.to_vec();
        let mut w1 = 0.0;
        for _ in 0..2 {
            let c = dot(&u2, &u1);
            axpy(-c, &u1, &mut u2);
            w1 += c;
        }
        let w2_sq = norm_sq(&u2);
        if !(w2_sq > SINGULAR_REL * ww) {
            return None;
        }
        let w2 = libm::sqrt(w2_sq);
        u2.iter_mut().for_each(|x| *x /= w2);
        Some(Basis { u1, u2, w1, w2 })
    }

    pub fn v_norm(&self) -> f64 {
        libm::sqrt(self.gram[0][0])
    }

    pub fn w_norm(&self) -> f64 {
        libm::sqrt(self.gram[1][1])
    }

    /// `base + alpha v + beta w`
    pub fn point(&self, alpha: f64, beta: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.base.len()];
        combine_into(self.base, alpha, self.v, beta, self.w, &mut p);
        p
    }

    /// False when `v` and `w` do not span a plane numerically.
    pub fn is_plane(&self) -> bool {
        self.basis.is_some()
    }

    /// Converts orthonormal coordinates `(a, b)` to `(alpha, beta)`.
    pub fn coords_from_orthonormal(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        let bs = self.basis.as_ref()?;
        let beta = b / bs.w2;
        Some(((a - beta * bs.w1) / self.v_norm(), beta))
    }

    /// Orthogonality scale `max(|v|, |w|)` used by the inner stopping rule.
    pub fn scale(&self) -> f64 {
        self.v_norm().max(self.w_norm())
    }
}

/// `F` and its gradient at one point of the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedEval {
    pub value: f64,
    /// `(<grad f, v>, <grad f, w>)`
    pub grad2: [f64; 2],
    pub point: Vec<f64>,
    /// Full gradient of `f` at `point`.
    pub gradient: Vec<f64>,
}

/// One value+gradient evaluation of `f` at `base + alpha v + beta w`.
pub fn restricted_value_grad<O: Objective + ?Sized>(
    f: &O,
    sp: &PlaneSubproblem<'_>,
    alpha: f64,
    beta: f64,
) -> RestrictedEval {
    let point = sp.point(alpha, beta);
    let mut gradient = vec![0.0; point.len()];
    let value = f.value_gradient_into(&point, &mut gradient);
    RestrictedEval {
        value,
        grad2: [dot(&gradient, sp.v), dot(&gradient, sp.w)],
        point,
        gradient,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSolution {
    pub alpha: f64,
    pub beta: f64,
    pub x_next: Vec<f64>,
    /// `|grad F(alpha, beta)|`
    pub inner_grad_norm: f64,
    pub inner_iters: u32,
    /// Gradient evaluations of `f` made by the solver.
    pub grad_evals: u32,
    /// `f(x_next)` and `grad f(x_next)` when the solver computed them.
    pub next: Option<(f64, Vec<f64>)>,
}

fn orthonormal_point(sp: &PlaneSubproblem<'_>, bs: &Basis, a: f64, b: f64) -> Vec<f64> {
    let mut p = vec![0.0; sp.base.len()];
    combine_into(sp.base, a, &bs.u1, b, &bs.u2, &mut p);
    p
}

fn norm2(g: [f64; 2]) -> f64 {
    libm::sqrt(g[0] * g[0] + g[1] * g[1])
}

/// One Newton step on the quadratic `F`, which is exact.
///
/// Solves the 2x2 system `U^T A U c = -U^T v` in the orthonormal basis `U`.
pub fn solve_newton_quadratic(
    p: &QuadraticProblem,
    sp: &PlaneSubproblem<'_>,
) -> Result<PlaneSolution> {
    check_dim(p.dim(), sp.base.len())?;
    let bs = sp.basis.as_ref().ok_or(Error::DegeneratePlane)?;
    let h11 = p.curvature(&bs.u1, &bs.u1);
    let h12 = p.curvature(&bs.u1, &bs.u2);
    let h22 = p.curvature(&bs.u2, &bs.u2);
    let rhs = [-dot(sp.v, &bs.u1), -dot(sp.v, &bs.u2)];
    let [a, b] = solve_sym2(h11, h12, h22, rhs, SINGULAR_REL).ok_or(Error::DegeneratePlane)?;
    let x_next = orthonormal_point(sp, bs, a, b);
    let (alpha, beta) = sp
        .coords_from_orthonormal(a, b)
        .ok_or(Error::DegeneratePlane)?;
    let g = p.gradient(&x_next);
    Ok(PlaneSolution {
        alpha,
        beta,
        inner_grad_norm: norm2([dot(&g, sp.v), dot(&g, sp.w)]),
        x_next,
        inner_iters: 1,
        grad_evals: 0,
        next: None,
    })
}

/// Parameters of the Armijo inner solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoOptions {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Backtracking factor.
    pub shrink: f64,
    pub max_backtracks: u32,
    /// When set, the next trial step is twice the last accepted one;
    /// otherwise every iteration restarts from `1/L`.
    pub grow: bool,
}

impl Default for ArmijoOptions {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
            grow: true,
        }
    }
}

struct OrthoEval {
    value: f64,
    /// Gradient of `F` in orthonormal coordinates.
    proj: [f64; 2],
    /// `(<g, v>, <g, w>)`
    grad2: [f64; 2],
    point: Vec<f64>,
    gradient: Vec<f64>,
}

fn eval_orthonormal<O: Objective + ?Sized>(
    f: &O,
    sp: &PlaneSubproblem<'_>,
    bs: &Basis,
    a: f64,
    b: f64,
) -> OrthoEval {
    let point = orthonormal_point(sp, bs, a, b);
    let mut gradient = vec![0.0; point.len()];
    let value = f.value_gradient_into(&point, &mut gradient);
    OrthoEval {
        value,
        proj: [dot(&gradient, &bs.u1), dot(&gradient, &bs.u2)],
        grad2: [dot(&gradient, sp.v), dot(&gradient, sp.w)],
        point,
        gradient,
    }
}

/// Projected gradient descent on `F` with Armijo backtracking, from the base
/// point.
///
/// Directions are `-grad f` projected onto the plane. Stops once
/// `|grad F| <= inner_tol * max(|v|, |w|)`. A trial step `s` along `d` is
/// accepted when `<grad F(z + s d), d> <= c1 <grad F(z), d>`; for convex `F`
/// this implies the Armijo decrease `F(z + s d) <= F(z) + c1 s <grad F(z), d>`
/// and never steps past the minimum along `d`. Value differences are not
/// used, so the test stays reliable below rounding level of `f`.
pub fn solve_gd_armijo<O: Objective + ?Sized>(
    f: &O,
    sp: &PlaneSubproblem<'_>,
    inner_tol: f64,
    max_inner: u32,
) -> Result<PlaneSolution> {
    solve_gd_armijo_with(f, sp, inner_tol, max_inner, &ArmijoOptions::default())
}

pub fn solve_gd_armijo_with<O: Objective + ?Sized>(
    f: &O,
    sp: &PlaneSubproblem<'_>,
    inner_tol: f64,
    max_inner: u32,
    opts: &ArmijoOptions,
) -> Result<PlaneSolution> {
    if !(inner_tol > 0.0) {
        return Err(Error::InvalidArgument("inner tolerance must be positive"));
    }
    check_dim(f.dim(), sp.base.len())?;
    let bs = sp.basis.as_ref().ok_or(Error::DegeneratePlane)?;
    let threshold = inner_tol * sp.scale();
    let initial_step = 1.0 / f.lip();

    let mut z = [0.0f64, 0.0];
    let mut cur = eval_orthonormal(f, sp, bs, 0.0, 0.0);
    let mut grad_evals = 1u32;
    let mut iters = 0u32;
    let mut trial = initial_step;

    while norm2(cur.grad2) > threshold && iters < max_inner {
        let d = [-cur.proj[0], -cur.proj[1]];
        let slope = -(d[0] * d[0] + d[1] * d[1]);
        if !(slope < 0.0) {
            break;
        }
        let mut s = trial;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let cand = eval_orthonormal(f, sp, bs, z[0] + s * d[0], z[1] + s * d[1]);
            grad_evals += 1;
            let deriv = cand.proj[0] * d[0] + cand.proj[1] * d[1];
            if cand.value.is_finite() && deriv <= opts.c1 * slope {
                accepted = Some(cand);
                break;
            }
            s *= opts.shrink;
        }
        let Some(next) = accepted else { break };
        z = [z[0] + s * d[0], z[1] + s * d[1]];
        cur = next;
        iters += 1;
        trial = if opts.grow { 2.0 * s } else { initial_step };
    }

    let inner_grad_norm = norm2(cur.grad2);
    if inner_grad_norm > 1e3 * threshold {
        return Err(Error::InnerStall {
            grad_norm: inner_grad_norm,
            threshold,
        });
    }
    let (alpha, beta) = sp
        .coords_from_orthonormal(z[0], z[1])
        .ok_or(Error::DegeneratePlane)?;
    Ok(PlaneSolution {
        alpha,
        beta,
        x_next: cur.point,
        inner_grad_norm,
        inner_iters: iters,
        grad_evals,
        next: Some((cur.value, cur.gradient)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMinimum {
    pub point: Vec<f64>,
    /// Position on the segment, `point = x + lambda (y - x)`.
    pub lambda: f64,
    pub value: f64,
    pub value_evals: u32,
}

/// Minimizer of `f` on the segment `[x, y]` by golden-section search down to
/// an interval width of `1e-12`; never worse than the midpoint.
pub fn segment_minimizer<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    y: &[f64],
) -> Result<SegmentMinimum> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), y.len())?;
    let dir: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let mut buf = vec![0.0; x.len()];
    let mut evals = 0u32;
    let mut eval_at = |lam: f64, buf: &mut [f64]| {
        for i in 0..x.len() {
            buf[i] = x[i] + lam * dir[i];
        }
        evals += 1;
        f.value(buf)
    };

    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval_at(c, &mut buf);
    let mut fd = eval_at(d, &mut buf);
    while b - a > 1e-12 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval_at(c, &mut buf);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval_at(d, &mut buf);
        }
    }
    let (mut lambda, mut value) = if fc <= fd { (c, fc) } else { (d, fd) };
    let f_mid = eval_at(0.5, &mut buf);
    if f_mid <= value {
        lambda = 0.5;
        value = f_mid;
    }
    let point = x
        .iter()
        .zip(&dir)
        .map(|(xi, di)| xi + lambda * di)
        .collect();
    Ok(SegmentMinimum {
        point,
        lambda,
        value,
        value_evals: evals,
    })
}
