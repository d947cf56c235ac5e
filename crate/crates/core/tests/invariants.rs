use ellipcenters::companion::{companion_point, exact_step_quadratic};
use ellipcenters::diagnostics::audit_dominance;
use ellipcenters::linalg::{dot, norm_sq};
use ellipcenters::objectives::generate_logreg;
use ellipcenters::plane2d::PlaneSubproblem;
use ellipcenters::reference::compute_reference;
use ellipcenters::solvers::{me_step, run_me, SolverConfig};
use ellipcenters::{Objective, QuadraticProblem};
use proptest::prelude::*;

/// Hides the quadratic structure so the generic code paths run.
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

fn point(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    ellipcenters::objectives::gaussian_vector(n, seed)
        .into_iter()
        .map(|v| v * scale)
        .collect()
}

fn check_fd<O: Objective>(f: &O, x: &[f64]) {
    let g = f.gradient(x);
    let gn = norm_sq(&g).sqrt();
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        y[i] = x[i] + h;
        let up = f.value(&y);
        y[i] = x[i] - h;
        let down = f.value(&y);
        y[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        assert!(
            (fd - g[i]).abs() <= 1e-5 * gn.max(1.0),
            "coord {i}: fd {fd} vs {}",
            g[i]
        );
    }
}

fn small_config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(small_config())]

    #[test]
    fn gradients_match_finite_differences(seed in 0u64..10_000, n in 2usize..12) {
        let q = QuadraticProblem::random_spd(n, 20.0, seed).unwrap();
        check_fd(&q, &point(n, seed + 1, 1.0));
        let p = generate_logreg(n, n.div_ceil(2).max(2), 20.0, seed).unwrap();
        check_fd(&p, &point(n, seed + 2, 1.0));
    }

    #[test]
    fn strong_convexity_and_smoothness_inequalities(seed in 0u64..10_000, n in 2usize..10) {
        let p = generate_logreg(n, n, 15.0, seed).unwrap();
        let x = point(n, seed + 3, 2.0);
        let y = point(n, seed + 4, 2.0);
        let (gx, gy) = (p.gradient(&x), p.gradient(&y));
        let dg: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
        let dx: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let inner = dot(&dg, &dx);
        // co-coercivity
        prop_assert!(inner >= norm_sq(&dg) / p.lip() - 1e-12);
        // strong monotonicity
        prop_assert!(inner >= p.mu() * norm_sq(&dx) * (1.0 - 1e-9));
        // Polyak-Lojasiewicz against a reference minimum
        let r = compute_reference(&p).unwrap();
        let gap = p.value(&x) - r.f_star;
        prop_assert!(norm_sq(&gx) >= 2.0 * p.mu() * gap * (1.0 - 1e-9));
    }

    #[test]
    fn companion_lies_on_the_level_set(seed in 0u64..10_000, n in 2usize..15) {
        let q = QuadraticProblem::random_spd(n, 50.0, seed).unwrap();
        let x = point(n, seed + 5, 3.0);
        let v = q.gradient(&x);
        let closed = companion_point(&q, &x, &v, 1e-12).unwrap();
        let generic = companion_point(&Opaque(&q), &x, &v, 1e-12).unwrap();
        prop_assert!(closed.level_residual <= 1e-12);
        prop_assert!(generic.level_residual <= 1e-12);
        prop_assert!((closed.t - generic.t).abs() <= 1e-9 * closed.t);
        let t_star = exact_step_quadratic(&q, &v).unwrap();
        prop_assert!((closed.t - 2.0 * t_star).abs() <= 1e-12 * closed.t);
        // strictly below the level inside the segment
        let fx = q.value(&x);
        for frac in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let z: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - frac * closed.t * b).collect();
            prop_assert!(q.value(&z) < fx);
        }
    }

    #[test]
    fn logistic_companion_residual(seed in 0u64..10_000) {
        let p = generate_logreg(8, 4, 30.0, seed).unwrap();
        let x = point(8, seed + 6, 1.0);
        let v = p.gradient(&x);
        let c = companion_point(&p, &x, &v, 1e-12).unwrap();
        prop_assert!(c.t > 0.0 && c.level_residual <= 1e-12);
    }

    #[test]
    fn me_step_minimizes_over_the_plane(seed in 0u64..10_000, n in 3usize..10) {
        let p = generate_logreg(n, n, 20.0, seed).unwrap();
        let x = point(n, seed + 7, 1.0);
        let cfg = SolverConfig::default();
        let s = me_step(&p, &x, &cfg).unwrap();
        prop_assert!(s.f_next <= p.value(&x));
        prop_assert!(s.f_next <= s.companion.value + 1e-15);
        if s.li {
            let v = p.gradient(&x);
            let w = p.gradient(&s.companion.y);
            let sp = PlaneSubproblem::new(&x, &v, &w, p.lip()).unwrap();
            let g = s.geometry.unwrap();
            let (a0, b0) = solve_coords(&sp, &x, &s.x_next);
            for (da, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3), (1e-3, 1e-3)] {
                let z = sp.point(a0 + da / g.v_norm, b0 + db / g.w_norm);
                prop_assert!(p.value(&z) >= s.f_next - 1e-14 * s.f_next.abs().max(1.0));
            }
        }
    }

    #[test]
    fn me_dominates_exact_linesearch(seed in 0u64..10_000, n in 2usize..30, kappa in 2.0f64..200.0) {
        let q = QuadraticProblem::random_spd(n, kappa, seed).unwrap();
        let x = point(n, seed + 8, 1.0);
        prop_assert!(audit_dominance(&q, &x, &SolverConfig::default()).unwrap().pass);
    }

    #[test]
    fn generation_and_runs_are_deterministic(seed in 0u64..10_000) {
        let a = generate_logreg(6, 3, 10.0, seed).unwrap();
        let b = generate_logreg(6, 3, 10.0, seed).unwrap();
        prop_assert_eq!(a.data().as_slice(), b.data().as_slice());
        prop_assert_eq!(a.labels(), b.labels());
        let cfg = SolverConfig::default();
        let ta = run_me(&a, &[0.0; 6], &cfg).unwrap();
        let tb = run_me(&b, &[0.0; 6], &cfg).unwrap();
        prop_assert_eq!(ta, tb);
    }
}

/// Recovers plane coordinates of `z` by least squares against `(v, w)`.
fn solve_coords(sp: &PlaneSubproblem, x: &[f64], z: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
    let (r0, r1) = (dot(sp.v, &d), dot(sp.w, &d));
    let [[a, b], [_, c]] = sp.gram;
    let det = a * c - b * b;
    ((c * r0 - b * r1) / det, (a * r1 - b * r0) / det)
}
