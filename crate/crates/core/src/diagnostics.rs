//! Post-hoc certification of convergence guarantees against a [`RunTrace`].
//!
//! Every check is one-sided: the observed quantity must stay below its
//! theoretical bound, with relative slack [`RATE_SLACK`] for rate bounds.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::error::{check_dim, Error, Result};
use crate::linalg::dist_sq;
use crate::objectives::Objective;
use crate::solvers::{gd_exact_step, me_step, RunTrace, SolverConfig, SolverId, StepGeometry};

/// Relative slack on every rate audit.
pub const RATE_SLACK: f64 = 1e-8;
/// Relative slack (w.r.t. `|f(x^k)|`) of the Baillon-Haddad descent audit.
pub const BH_SLACK: f64 = 1e-9;
/// Relative slack (w.r.t. `max(1, |f(x)|)`) of the dominance audit.
pub const DOMINANCE_SLACK: f64 = 1e-12;

/// Universal per-step rate `1 - 1/kappa`.
pub fn eta(kappa: f64) -> f64 {
    1.0 - 1.0 / kappa
}

/// Rate on linearly independent steps, `(kappa - 1) / (kappa + 1)`.
pub fn eta_star(kappa: f64) -> f64 {
    (kappa - 1.0) / (kappa + 1.0)
}

/// Angle-improved rate `eta* - sin^2(theta) / (4 kappa^2)`.
pub fn eta_bar(kappa: f64, sin2_theta: f64) -> f64 {
    eta_star(kappa) - sin2_theta / (4.0 * kappa * kappa)
}

/// Gaps at or below this size are treated as zero.
pub fn gap_floor(f_star: f64) -> f64 {
    1e-14 * libm::fabs(f_star) + 1e-300
}

/// Per-step ratios `(f(x^{k+1}) - f*) / (f(x^k) - f*)`; entries whose
/// denominator is below [`gap_floor`] are `None`.
pub fn contraction_ratios(trace: &RunTrace, f_star: f64) -> Result<Vec<Option<f64>>> {
    if trace.records.iter().any(|r| r.f_val < f_star) {
        return Err(Error::InvalidArgument(
            "f_star is above a value in the trace",
        ));
    }
    let floor = gap_floor(f_star);
    Ok(trace
        .records
        .windows(2)
        .map(|w| {
            let g0 = w[0].f_val - f_star;
            let g1 = w[1].f_val - f_star;
            (g0 > floor).then(|| g1 / g0)
        })
        .collect())
}

/// Stores [`contraction_ratios`] into the records (the last record keeps `None`).
pub fn fill_ratios(trace: &mut RunTrace, f_star: f64) -> Result<()> {
    let ratios = contraction_ratios(trace, f_star)?;
    for (rec, r) in trace.records.iter_mut().zip(ratios) {
        rec.ratio = r;
    }
    Ok(())
}

/// Inequalities checked by the audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Audit {
    /// ratio <= 1 - 1/kappa
    RateUniversal,
    /// ratio <= eta* on LI steps
    RateLi,
    /// ratio <= eta* - sin^2 / (4 kappa^2) on LI steps
    RateImproved,
    /// (eta*)^2 < eta_bar < eta*
    Sandwich,
    /// gap_{k+1} <= eta^{k-1} gap_1
    GapEnvelope,
    /// |x^k - x*|^2 <= kappa eta^{k-1} |x^1 - x*|^2
    DistanceEnvelope,
    /// f(x^k) - f(x^{k+1}) >= (|g^{k+1}|^2 + |g^k|^2) / (2L)
    BhDescent,
    /// |<g^{k+1}, v^k>| <= eps_orth
    OrthogonalV,
    /// |<g^{k+1}, w^k>| <= eps_orth
    OrthogonalW,
    /// |g^{k+1} - v|^2 = |g^{k+1}|^2 + |v|^2
    Pythagoras,
    /// |g^{k+1}|^2 + |v|^2 <= L^2 |x^{k+1} - x^k|^2
    LipschitzStep,
    /// f(x_ME) <= f(x_GD-exact)
    Dominance,
    /// converged solvers agree on the final value
    Consistency,
}

impl Audit {
    pub fn name(self) -> &'static str {
        match self {
            Audit::RateUniversal => "rate-universal",
            Audit::RateLi => "rate-li",
            Audit::RateImproved => "rate-improved",
            Audit::Sandwich => "sandwich",
            Audit::GapEnvelope => "gap-envelope",
            Audit::DistanceEnvelope => "distance-envelope",
            Audit::BhDescent => "bh-descent",
            Audit::OrthogonalV => "orthogonal-v",
            Audit::OrthogonalW => "orthogonal-w",
            Audit::Pythagoras => "pythagoras",
            Audit::LipschitzStep => "lipschitz-step",
            Audit::Dominance => "dominance",
            Audit::Consistency => "consistency",
        }
    }
}

impl fmt::Display for Audit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One audited inequality `value <= bound` at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditCheck {
    pub audit: Audit,
    /// 1-based index of the iterate the step starts from.
    pub step: u32,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl AuditCheck {
    /// `bound - value`; negative on failure.
    pub fn slack(&self) -> f64 {
        self.bound - self.value
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

/// Summary of one inequality over all audited steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSummary {
    pub audit: Audit,
    pub count: usize,
    pub failures: usize,
    /// Smallest `bound - value` observed.
    pub worst_slack: f64,
    /// Step where the worst slack occurred.
    pub worst_step: u32,
}

impl AuditReport {
    /// Records `value <= bound` for `audit` at `step`.
    pub fn record(&mut self, audit: Audit, step: u32, value: f64, bound: f64) {
        self.check(audit, step, value, bound);
    }

    fn check(&mut self, audit: Audit, step: u32, value: f64, bound: f64) {
        let pass = value <= bound;
        self.checks.push(AuditCheck {
            audit,
            step,
            value,
            bound,
            pass,
        });
    }

    fn check_strict(&mut self, audit: Audit, step: u32, value: f64, bound: f64) {
        let pass = value < bound;
        self.checks.push(AuditCheck {
            audit,
            step,
            value,
            bound,
            pass,
        });
    }

    /// True iff every check passed.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn of(&self, audit: Audit) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(move |c| c.audit == audit)
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
    }

    /// Per-inequality summaries, in [`Audit`] order.
    pub fn summaries(&self) -> Vec<AuditSummary> {
        let mut out: Vec<AuditSummary> = Vec::new();
        for c in &self.checks {
            match out.iter_mut().find(|s| s.audit == c.audit) {
                Some(s) => {
                    s.count += 1;
                    s.failures += usize::from(!c.pass);
                    if c.slack() < s.worst_slack {
                        s.worst_slack = c.slack();
                        s.worst_step = c.step;
                    }
                }
                None => out.push(AuditSummary {
                    audit: c.audit,
                    count: 1,
                    failures: usize::from(!c.pass),
                    worst_slack: c.slack(),
                    worst_step: c.step,
                }),
            }
        }
        out.sort_by_key(|s| s.audit);
        out
    }

    /// Human-readable table, one line per inequality.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<18} {:>7} {:>8} {:>14} {:>6}  result",
            "audit", "checks", "failures", "worst slack", "step"
        );
        for sm in self.summaries() {
            let _ = writeln!(
                s,
                "{:<18} {:>7} {:>8} {:>14.6e} {:>6}  {}",
                sm.audit.name(),
                sm.count,
                sm.failures,
                sm.worst_slack,
                sm.worst_step,
                if sm.failures == 0 { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(s, "overall: {}", if self.pass() { "PASS" } else { "FAIL" });
        s
    }
}

/// Rate constants of a run, with the per-step improved rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCertificate {
    pub kappa: f64,
    pub eta: f64,
    pub eta_star: f64,
    /// `eta_bar` for each step; `None` on LD steps.
    pub eta_bar: Vec<Option<f64>>,
    /// Smallest `sin^2 theta` over LI steps.
    pub c_min: Option<f64>,
}

/// Audits the rate guarantees along an ME trace.
///
/// Checks (a) the universal rate, (b) the LI rate, (c) the angle-improved
/// rate with its sandwich for `kappa >= 2`, (d) the global gap envelope and
/// (e) the iterate-distance envelope when `x_star` and stored iterates are
/// available, plus the Baillon-Haddad descent bound on LI steps.
pub fn certify_rates(
    trace: &RunTrace,
    f_star: f64,
    mu: f64,
    lip: f64,
    x_star: Option<&[f64]>,
) -> Result<(RateCertificate, AuditReport)> {
    if trace.solver != SolverId::Me {
        return Err(Error::InvalidArgument(
            "rate certification needs an ME trace",
        ));
    }
    if !(mu > 0.0 && lip >= mu) {
        return Err(Error::InvalidArgument("need 0 < mu <= L"));
    }
    let ratios = contraction_ratios(trace, f_star)?;
    let kappa = lip / mu;
    let (e, es) = (eta(kappa), eta_star(kappa));
    let tol = 1.0 + RATE_SLACK;
    let mut report = AuditReport::default();
    let mut bars = Vec::with_capacity(ratios.len());
    let mut c_min: Option<f64> = None;

    for (i, ratio) in ratios.iter().enumerate() {
        let rec = &trace.records[i];
        let next = &trace.records[i + 1];
        let li = rec.li_flag == Some(true);
        let bar = if li {
            let s2 = rec.sin2_theta.unwrap_or(0.0);
            c_min = Some(c_min.map_or(s2, |c| c.min(s2)));
            Some(eta_bar(kappa, s2))
        } else {
            None
        };
        bars.push(bar);
        if let Some(r) = *ratio {
            report.check(Audit::RateUniversal, rec.k, r, e * tol);
            if let Some(b) = bar {
                report.check(Audit::RateLi, rec.k, r, es * tol);
                report.check(Audit::RateImproved, rec.k, r, b * tol);
            }
        }
        if let Some(b) = bar {
            if kappa >= 2.0 {
                report.check_strict(Audit::Sandwich, rec.k, es * es, b);
                report.check_strict(Audit::Sandwich, rec.k, b, es);
            }
            let decrease = rec.f_val - next.f_val;
            let bound =
                (next.grad_norm * next.grad_norm + rec.grad_norm * rec.grad_norm) / (2.0 * lip);
            // decrease >= bound - slack, written as value <= bound
            report.check(
                Audit::BhDescent,
                rec.k,
                bound - BH_SLACK * libm::fabs(rec.f_val),
                decrease,
            );
        }
    }

    let gap1 = trace.records[0].f_val - f_star;
    for (i, rec) in trace.records.iter().enumerate().skip(1) {
        let envelope = libm::pow(e, (i - 1) as f64) * gap1;
        report.check(
            Audit::GapEnvelope,
            rec.k,
            rec.f_val - f_star,
            envelope * tol,
        );
    }

    if let (Some(xs), Some(iterates)) = (x_star, trace.iterates.as_ref()) {
        check_dim(trace.x_final.len(), xs.len())?;
        let d1 = dist_sq(&iterates[0], xs);
        for (i, x) in iterates.iter().enumerate() {
            let envelope = kappa * libm::pow(e, i as f64) * d1;
            report.check(
                Audit::DistanceEnvelope,
                trace.records[i].k,
                dist_sq(x, xs),
                envelope * tol,
            );
        }
    }

    Ok((
        RateCertificate {
            kappa,
            eta: e,
            eta_star: es,
            eta_bar: bars,
            c_min,
        },
        report,
    ))
}

/// `10 * inner_tol * max(|v|, |w|)`.
pub fn orthogonality_tolerance(inner_tol: f64, g: &StepGeometry) -> f64 {
    10.0 * inner_tol * g.v_norm.max(g.w_norm)
}

/// Orthogonality at the plane minimizer, the Pythagorean identity it
/// implies, and the Lipschitz bound on `|g^{k+1}|^2 + |v|^2`.
///
/// `steps` pairs the 1-based step index with its geometry; only LI steps
/// belong here.
pub fn audit_orthogonality(steps: &[(u32, StepGeometry)], inner_tol: f64, lip: f64) -> AuditReport {
    let mut report = AuditReport::default();
    for &(k, g) in steps {
        let eps = orthogonality_tolerance(inner_tol, &g);
        report.check(Audit::OrthogonalV, k, libm::fabs(g.orth_v), eps);
        report.check(Audit::OrthogonalW, k, libm::fabs(g.orth_w), eps);
        // The defect equals -2 <g^{k+1}, v> exactly; allow for rounding of
        // the three squared norms.
        let sq = g.next_grad_norm * g.next_grad_norm + g.v_norm * g.v_norm;
        report.check(
            Audit::Pythagoras,
            k,
            libm::fabs(g.pythagoras_defect),
            2.0 * eps + 1e-13 * sq,
        );
        let reach = lip * lip * g.step_norm * g.step_norm;
        report.check(Audit::LipschitzStep, k, sq, reach * (1.0 + RATE_SLACK));
    }
    report
}

/// [`audit_orthogonality`] over the LI steps recorded in an ME trace.
pub fn audit_orthogonality_trace(trace: &RunTrace, lip: f64) -> AuditReport {
    let steps: Vec<(u32, StepGeometry)> = trace
        .records
        .iter()
        .filter(|r| r.li_flag == Some(true))
        .filter_map(|r| r.geometry.map(|g| (r.k, g)))
        .collect();
    audit_orthogonality(&steps, trace.config.inner_tol, lip)
}

/// Baillon-Haddad descent on LI steps of an ME trace.
pub fn audit_bh_descent(trace: &RunTrace, lip: f64) -> AuditReport {
    let mut report = AuditReport::default();
    for w in trace.records.windows(2) {
        if w[0].li_flag != Some(true) {
            continue;
        }
        let decrease = w[0].f_val - w[1].f_val;
        let bound =
            (w[1].grad_norm * w[1].grad_norm + w[0].grad_norm * w[0].grad_norm) / (2.0 * lip);
        report.check(
            Audit::BhDescent,
            w[0].k,
            bound - BH_SLACK * libm::fabs(w[0].f_val),
            decrease,
        );
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dominance {
    pub f_me: f64,
    pub f_gd: f64,
    pub pass: bool,
}

/// One ME step against one exact-linesearch step from the same `x`.
pub fn audit_dominance<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    cfg: &SolverConfig,
) -> Result<Dominance> {
    let me = me_step(f, x, cfg)?;
    let gd = gd_exact_step(f, x)?;
    let fx = f.value(x);
    let pass = me.f_next <= gd.f_next + DOMINANCE_SLACK * libm::fabs(fx).max(1.0);
    Ok(Dominance {
        f_me: me.f_next,
        f_gd: gd.f_next,
        pass,
    })
}

/// Worst-case ME iteration count `ceil(ln(initial/target) / ln(1/eta*))`.
pub fn theoretical_iteration_bound(kappa: f64, initial_gap: f64, target_gap: f64) -> Result<u64> {
    if !(initial_gap > 0.0 && target_gap > 0.0) {
        return Err(Error::InvalidArgument("gaps must be positive"));
    }
    if !(kappa >= 1.0) {
        return Err(Error::InvalidArgument("kappa must be >= 1"));
    }
    if initial_gap <= target_gap {
        return Ok(0);
    }
    let es = eta_star(kappa);
    if es == 0.0 {
        return Ok(1);
    }
    let n = libm::log(initial_gap / target_gap) / libm::log(1.0 / es);
    Ok(libm::ceil(n) as u64)
}
