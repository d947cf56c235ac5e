use alloc::vec;
use alloc::vec::Vec;

use super::{seeded_rng, standard_normal, Objective};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, orthonormalize_columns, symmetric_eigenvalues, Cholesky, Matrix};

/// `f(x) = 1/2 x^T A x - b^T x + c` with `A` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: Matrix,
    b: Vec<f64>,
    c: f64,
    mu: f64,
    lip: f64,
    chol: Cholesky,
}

impl QuadraticProblem {
    /// Validates symmetry and positive definiteness; `mu` and `lip` are the
    /// extreme eigenvalues of `A`.
    pub fn new(a: Matrix, b: Vec<f64>, c: f64) -> Result<Self> {
        let chol = Self::validate(&a, &b)?;
        let eig = symmetric_eigenvalues(&a);
        let mu = eig[0];
        let lip = eig[eig.len() - 1];
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument("matrix is not positive definite"));
        }
        Ok(Self {
            a,
            b,
            c,
            mu,
            lip,
            chol,
        })
    }

    /// Like [`new`](Self::new) but trusts the caller's spectrum bounds.
    pub fn with_constants(a: Matrix, b: Vec<f64>, c: f64, mu: f64, lip: f64) -> Result<Self> {
        if !(mu > 0.0 && lip >= mu && lip.is_finite()) {
            return Err(Error::InvalidArgument("need 0 < mu <= lip"));
        }
        let chol = Self::validate(&a, &b)?;
        Ok(Self {
            a,
            b,
            c,
            mu,
            lip,
            chol,
        })
    }

    fn validate(a: &Matrix, b: &[f64]) -> Result<Cholesky> {
        if a.rows() != a.cols() || a.rows() == 0 {
            return Err(Error::InvalidArgument(
                "A must be a non-empty square matrix",
            ));
        }
        check_dim(a.rows(), b.len())?;
        if a.max_asymmetry() > 1e-12 * a.max_abs().max(1.0) {
            return Err(Error::InvalidArgument("A is not symmetric"));
        }
        Cholesky::new(a)
    }

    /// `A = I`, `b = 0`, `c = 0`: `f(x) = |x|^2 / 2`.
    pub fn isotropic(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n], vec![0.0; n], 0.0).expect("identity is SPD")
    }

    pub fn diagonal(d: &[f64], b: Vec<f64>, c: f64) -> Result<Self> {
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::with_constants(Matrix::from_diag(d), b, c, lo, hi)
    }

    /// Random SPD instance with spectrum geometrically spaced on `[1, kappa]`,
    /// a Haar-like random eigenbasis, and standard normal `b`; `c = 0`.
    pub fn random_spd(n: usize, kappa: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return Err(Error::InvalidArgument("kappa must be >= 1"));
        }
        if n == 1 && kappa != 1.0 {
            return Err(Error::InvalidArgument("a 1-D quadratic has kappa = 1"));
        }
        let mut rng = seeded_rng(seed);
        let mut q = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] = standard_normal(&mut rng);
            }
        }
        orthonormalize_columns(&mut q)?;
        let eig: Vec<f64> = (0..n)
            .map(|i| {
                if n == 1 {
                    1.0
                } else {
                    libm::pow(kappa, i as f64 / (n - 1) as f64)
                }
            })
            .collect();
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..n).map(|k| q[(i, k)] * eig[k] * q[(j, k)]).sum();
                a[(i, j)] = s;
                a[(j, i)] = s;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        Self::with_constants(a, b, 0.0, 1.0, kappa)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Solution of `A x = b`.
    pub fn minimizer(&self) -> Vec<f64> {
        self.chol.solve(&self.b)
    }

    /// `u^T A w`
    pub fn curvature(&self, u: &[f64], w: &[f64]) -> f64 {
        self.a.bilinear(u, w)
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn lip(&self) -> f64 {
        self.lip
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.a.bilinear(x, x) - dot(&self.b, x) + self.c
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.a.mul_vec_into(x, out);
        for (o, bi) in out.iter_mut().zip(&self.b) {
            *o -= bi;
        }
    }

    fn value_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.a.mul_vec_into(x, out);
        // 1/2 x^T A x - b^T x = x^T (Ax/2 - b)
        let v = x
            .iter()
            .zip(out.iter())
            .zip(&self.b)
            .map(|((xi, ai), bi)| xi * (0.5 * ai - bi))
            .sum::<f64>();
        for (o, bi) in out.iter_mut().zip(&self.b) {
            *o -= bi;
        }
        v + self.c
    }

    fn quadratic(&self) -> Option<&QuadraticProblem> {
        Some(self)
    }
}
