//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::time::{Duration, Instant};

use ellipcenters::companion::{companion_point, companion_t_quadratic};
use ellipcenters::diagnostics::{
    audit_dominance, audit_orthogonality_trace, certify_rates, gap_floor,
    theoretical_iteration_bound, Audit, AuditReport,
};
use ellipcenters::linalg::{dot, norm, norm_sq};
use ellipcenters::objectives::{gaussian_vector, generate_logreg};
use ellipcenters::plane2d::{solve_gd_armijo, solve_newton_quadratic, PlaneSubproblem};
use ellipcenters::reference::compute_reference;
use ellipcenters::solvers::{run_me, RunStatus, RunTrace, SolverConfig, SolverId};
use ellipcenters::{Objective, Problem, QuadraticProblem};
use ellipcenters_harness::{run_experiment, ExperimentResult, ExperimentSpec, ProblemKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Hides quadratic structure so the generic code paths run.
struct Opaque<'a>(&'a QuadraticProblem);

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

fn scaled(v: Vec<f64>, s: f64) -> Vec<f64> {
    v.into_iter().map(|x| x * s).collect()
}

fn failures(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", bad.join("; "))
    }
}

// shared suite for criteria 1-3

struct SuiteRun {
    label: String,
    report: AuditReport,
    status: RunStatus,
}

fn suite_instances() -> Vec<(String, Problem)> {
    let mut out = Vec::new();
    let combos = [(5, 10.0), (5, 100.0), (50, 10.0), (50, 100.0)];
    for seed in 0..10u64 {
        let (n, k) = combos[seed as usize % 4];
        out.push((
            format!("quadratic n={n} kappa={k} seed={seed}"),
            Problem::Quadratic(QuadraticProblem::random_spd(n, k, seed).unwrap()),
        ));
    }
    let combos = [
        (50, 10.0),
        (50, 100.0),
        (200, 10.0),
        (200, 100.0),
        (200, 100.0),
    ];
    for (i, &(n, k)) in combos.iter().enumerate() {
        let seed = 100 + i as u64;
        out.push((
            format!("logreg n={n} m={} kappa={k} seed={seed}", n / 2),
            Problem::LogReg(generate_logreg(n, n / 2, k, seed).unwrap()),
        ));
    }
    out
}

fn run_suite() -> (Vec<SuiteRun>, Duration) {
    let start = Instant::now();
    let cfg = SolverConfig {
        keep_iterates: true,
        ..SolverConfig::default()
    };
    let runs = suite_instances()
        .into_iter()
        .map(|(label, p)| {
            let reference = compute_reference(&p).unwrap();
            let trace = run_me(&p, &vec![0.0; p.dim()], &cfg).unwrap();
            let f_star = reference.f_star.min(trace.min_value());
            let (_, mut report) =
                certify_rates(&trace, f_star, p.mu(), p.lip(), Some(&reference.x_star)).unwrap();
            report.merge(audit_orthogonality_trace(&trace, p.lip()));
            SuiteRun {
                label,
                report,
                status: trace.status,
            }
        })
        .collect();
    (runs, start.elapsed())
}

fn suite_criterion(runs: &[SuiteRun], audits: &[Audit], time: Option<Duration>) -> Outcome {
    let mut checks = 0;
    let mut bad = Vec::new();
    let mut worst = f64::INFINITY;
    for r in runs {
        if r.status != RunStatus::Converged {
            bad.push(format!("{}: {}", r.label, r.status));
        }
        for c in r.report.checks.iter().filter(|c| audits.contains(&c.audit)) {
            checks += 1;
            worst = worst.min(c.slack() / c.bound.abs().max(f64::MIN_POSITIVE));
            if !c.pass {
                bad.push(format!(
                    "{} step {} {}: {:.6e} > {:.6e}",
                    r.label, c.step, c.audit, c.value, c.bound
                ));
            }
        }
    }
    let mut pass = bad.is_empty() && checks > 0;
    let mut detail = format!(
        "{} runs, {checks} checks, worst relative slack {worst:.3e}",
        runs.len()
    );
    if let Some(t) = time {
        pass &= t < Duration::from_secs(60);
        detail.push_str(&format!(", suite time {:.1}s", t.as_secs_f64()));
    }
    detail.push_str(&failures(&bad));
    outcome(pass, detail)
}

fn check_two<O: Objective>(
    f: &O,
    x1: &[f64],
    label: &str,
    bad: &mut Vec<String>,
    max_iters: &mut usize,
) {
    match run_me(f, x1, &SolverConfig::default()) {
        Ok(t) => {
            *max_iters = (*max_iters).max(t.iterations());
            if t.status != RunStatus::Converged || t.iterations() > 2 || t.last().grad_norm > 1e-6 {
                bad.push(format!(
                    "{label}: {} after {} iterations, |g| {:.2e}",
                    t.status,
                    t.iterations(),
                    t.last().grad_norm
                ));
            }
        }
        Err(e) => bad.push(format!("{label}: {e}")),
    }
}

fn two_dimensional() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut max_iters = 0;
    let kappas = [1.5, 2.0, 10.0, 100.0, 1e3, 1e4];
    for seed in 0..100u64 {
        let q =
            QuadraticProblem::random_spd(2, kappas[seed as usize % kappas.len()], seed).unwrap();
        let x1 = scaled(gaussian_vector(2, seed + 1000), 10.0);
        check_two(
            &q,
            &x1,
            &format!("quadratic seed {seed}"),
            &mut bad,
            &mut max_iters,
        );
    }
    for seed in 0..20u64 {
        let m = 1 + seed as usize % 4;
        let p = generate_logreg(2, m, [5.0, 50.0, 500.0][seed as usize % 3], seed).unwrap();
        let x1 = gaussian_vector(2, seed + 2000);
        check_two(
            &p,
            &x1,
            &format!("logreg seed {seed}"),
            &mut bad,
            &mut max_iters,
        );
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && t < Duration::from_secs(10),
        format!(
            "120 instances, max iterations {max_iters}, time {:.2}s{}",
            t.as_secs_f64(),
            failures(&bad)
        ),
    )
}

fn dominance() -> Outcome {
    let cfg = SolverConfig::default();
    let mut bad = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for seed in 0..100u64 {
        let i = seed as usize;
        let p = if seed % 2 == 0 {
            let n = [5, 20, 50][i % 3];
            let kappa = [10.0, 100.0, 1000.0][(i / 2) % 3];
            Problem::Quadratic(QuadraticProblem::random_spd(n, kappa, seed).unwrap())
        } else {
            let n = [10, 50][(i / 2) % 2];
            let kappa = [10.0, 100.0][(i / 4) % 2];
            Problem::LogReg(generate_logreg(n, n / 2, kappa, seed).unwrap())
        };
        let x = gaussian_vector(p.dim(), seed + 500);
        match audit_dominance(&p, &x, &cfg) {
            Ok(d) => {
                pairs += 1;
                worst = worst.max((d.f_me - d.f_gd) / p.value(&x).abs().max(1.0));
                if !d.pass {
                    bad.push(format!(
                        "seed {seed}: f_me {:.17e} f_gd {:.17e}",
                        d.f_me, d.f_gd
                    ));
                }
            }
            Err(e) => bad.push(format!("seed {seed}: {e}")),
        }
    }
    outcome(
        bad.is_empty() && pairs == 100,
        format!(
            "{pairs} pairs, max (f_me - f_gd)/max(1,|f|) {worst:.3e}{}",
            failures(&bad)
        ),
    )
}

fn quadratic_reduction() -> Outcome {
    let mut worst_t: f64 = 0.0;
    let mut worst_ab: f64 = 0.0;
    let mut bad = Vec::new();
    for seed in 0..20u64 {
        let n = [3, 10, 30, 60][seed as usize % 4];
        let q = QuadraticProblem::random_spd(n, [10.0, 100.0, 1000.0][seed as usize % 3], seed)
            .unwrap();
        let x = scaled(gaussian_vector(n, seed + 77), 5.0);
        let v = q.gradient(&x);
        let closed = companion_t_quadratic(&q, &v).unwrap();
        let bisected = companion_point(&Opaque(&q), &x, &v, 1e-12).unwrap();
        let et = (bisected.t - closed).abs() / closed;
        worst_t = worst_t.max(et);
        if et > 1e-9 {
            bad.push(format!("seed {seed}: companion t differs by {et:.3e}"));
        }
        let w = q.gradient(&bisected.y);
        let sp = PlaneSubproblem::new(&x, &v, &w, q.lip()).unwrap();
        match (
            solve_newton_quadratic(&q, &sp),
            solve_gd_armijo(&Opaque(&q), &sp, 1e-12, 10_000),
        ) {
            (Ok(a), Ok(b)) => {
                let e = (a.alpha - b.alpha).abs().max((a.beta - b.beta).abs());
                worst_ab = worst_ab.max(e);
                if e > 1e-8 {
                    bad.push(format!("seed {seed}: (alpha, beta) differ by {e:.3e}"));
                }
            }
            (a, b) => bad.push(format!(
                "seed {seed}: newton {:?} armijo {:?}",
                a.err(),
                b.err()
            )),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "20 instances, max rel t error {worst_t:.3e}, max (alpha,beta) error {worst_ab:.3e}{}",
            failures(&bad)
        ),
    )
}

fn outer(res: &ExperimentResult, id: SolverId) -> u64 {
    res.run_for(id).unwrap().trace.grad_evals_outer()
}

fn all_converged(res: &ExperimentResult) -> bool {
    res.runs
        .iter()
        .all(|r| r.trace.status == RunStatus::Converged)
}

fn orderings_and_bound() -> (Outcome, Outcome) {
    let mut spec = ExperimentSpec::new(ProblemKind::Logreg, 500, 100.0, 7);
    spec.m = Some(250);
    let a = run_experiment(&spec).unwrap();
    let [me, ge, gl, fg] = [
        SolverId::Me,
        SolverId::GdExact,
        SolverId::GdL,
        SolverId::FastGd,
    ]
    .map(|id| outer(&a, id));
    let first = all_converged(&a) && me < ge && ge < gl;

    let mut spec = ExperimentSpec::new(ProblemKind::Logreg, 1000, 500.0, 7);
    spec.m = Some(500);
    let b = run_experiment(&spec).unwrap();
    let gl_b = outer(&b, SolverId::GdL);
    let others = [SolverId::Me, SolverId::GdExact, SolverId::FastGd].map(|id| outer(&b, id));
    let second = all_converged(&b) && others.iter().all(|&o| gl_b >= 2 * o);
    let c7 = outcome(
        first && second,
        format!(
            "n=500 kappa=100 outer grads: me {me} < gd-exact {ge} < gd-l {gl} (fast-gd {fg}); \
             n=1000 kappa=500: gd-l {gl_b} vs me/gd-exact/fast-gd {others:?}"
        ),
    );
    let c8 = iteration_bound(
        &a.run_for(SolverId::Me).unwrap().trace,
        a.f_star,
        a.problem.kappa(),
    );
    (c7, c8)
}

fn iteration_bound(t: &RunTrace, f_star: f64, kappa: f64) -> Outcome {
    let initial = t.records[0].f_val - f_star;
    let terminal = (t.final_value() - f_star).max(gap_floor(f_star));
    let bound = theoretical_iteration_bound(kappa, initial, terminal).unwrap();
    let iters = t.iterations() as u64;
    outcome(
        iters < bound,
        format!("me iterations {iters} < bound {bound} (kappa {kappa}, gap {initial:.3e} -> {terminal:.3e})"),
    )
}

fn central_difference(p: &Problem, x: &[f64]) -> Vec<f64> {
    let mut z = x.to_vec();
    (0..x.len())
        .map(|c| {
            let h = 1e-5 * x[c].abs().max(1.0);
            z[c] = x[c] + h;
            let up = p.value(&z);
            z[c] = x[c] - h;
            let down = p.value(&z);
            z[c] = x[c];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn foundation() -> Outcome {
    let mut bad = Vec::new();
    let mut worst_fd: f64 = 0.0;
    let mut worst_level: f64 = 0.0;
    for s in 0..6u64 {
        let p = if s % 2 == 0 {
            Problem::Quadratic(QuadraticProblem::random_spd(8 + s as usize, 50.0, s).unwrap())
        } else {
            Problem::LogReg(generate_logreg(8 + s as usize, 6, 50.0, s).unwrap())
        };
        let n = p.dim();
        let f_star = compute_reference(&p).unwrap().f_star;
        for j in 0..5u64 {
            let x = gaussian_vector(n, 10 * s + j);
            let y = scaled(gaussian_vector(n, 10 * s + j + 5000), 2.0);
            let g = p.gradient(&x);
            let fd = central_difference(&p, &x);
            let err = norm(&fd.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&g);
            worst_fd = worst_fd.max(err);
            if err > 1e-6 {
                bad.push(format!("problem {s}: finite-difference error {err:.2e}"));
            }
            if norm_sq(&g) < 2.0 * p.mu() * (p.value(&x) - f_star) - 1e-9 {
                bad.push(format!("problem {s}: PL inequality violated"));
            }
            let gy = p.gradient(&y);
            let dg: Vec<f64> = g.iter().zip(&gy).map(|(a, b)| a - b).collect();
            let dx: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            if dot(&dg, &dx) < norm_sq(&dg) / p.lip() * (1.0 - 1e-12) {
                bad.push(format!("problem {s}: co-coercivity violated"));
            }
            let c = match &p {
                Problem::Quadratic(q) => companion_point(&Opaque(q), &x, &g, 1e-12),
                Problem::LogReg(_) => companion_point(&p, &x, &g, 1e-12),
            }
            .unwrap();
            worst_level = worst_level.max(c.level_residual);
            if c.level_residual > 1e-12 {
                bad.push(format!(
                    "problem {s}: level residual {:.2e}",
                    c.level_residual
                ));
            }
        }
    }
    let deterministic = rerun_is_identical();
    if !deterministic {
        bad.push("experiment reruns differ".into());
    }
    outcome(
        bad.is_empty(),
        format!(
            "fd rel error max {worst_fd:.2e}, level residual max {worst_level:.2e}, \
             PL and co-coercivity at 30 points, reruns identical: {deterministic}{}",
            failures(&bad)
        ),
    )
}

fn rerun_is_identical() -> bool {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mut spec = ExperimentSpec::new(ProblemKind::Logreg, 60, 30.0, 11);
        spec.output_dir = Some(d.path().to_path_buf());
        run_experiment(&spec).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    names.len() > 3
        && names.iter().all(|name| {
            let read = |i: usize| std::fs::read_to_string(dirs[i].path().join(name)).unwrap();
            let (a, b) = (read(0), read(1));
            if name == "summary.csv" {
                without_column(&a, 5) == without_column(&b, 5)
            } else {
                a == b
            }
        })
}

/// Drops the wall-time column.
fn without_column(csv: &str, col: usize) -> Vec<String> {
    csv.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != col)
                .map(|(_, s)| s)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

fn main() {
    let start = Instant::now();
    let results = std::thread::scope(|s| {
        let suite = s.spawn(|| {
            let (runs, t) = run_suite();
            [
                suite_criterion(
                    &runs,
                    &[
                        Audit::RateLi,
                        Audit::RateUniversal,
                        Audit::GapEnvelope,
                        Audit::DistanceEnvelope,
                    ],
                    Some(t),
                ),
                suite_criterion(&runs, &[Audit::RateImproved, Audit::Sandwich], None),
                suite_criterion(
                    &runs,
                    &[
                        Audit::OrthogonalV,
                        Audit::OrthogonalW,
                        Audit::BhDescent,
                        Audit::Pythagoras,
                        Audit::LipschitzStep,
                    ],
                    None,
                ),
            ]
        });
        let c4 = s.spawn(two_dimensional);
        let c5 = s.spawn(dominance);
        let c6 = s.spawn(quadratic_reduction);
        let c78 = s.spawn(orderings_and_bound);
        let c9 = s.spawn(foundation);
        let [c1, c2, c3] = suite.join().unwrap();
        let (c7, c8) = c78.join().unwrap();
        vec![
            ("rate certification", c1),
            ("improved rate and sandwich", c2),
            ("orthogonality and descent", c3),
            ("two-dimensional termination", c4.join().unwrap()),
            ("dominance over exact linesearch", c5.join().unwrap()),
            ("quadratic reduction", c6.join().unwrap()),
            ("gradient-count orderings", c7),
            ("worst-case bound slack", c8),
            ("foundation properties", c9.join().unwrap()),
        ]
    });
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {} {:<32} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
