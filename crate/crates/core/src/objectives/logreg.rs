use alloc::vec::Vec;

use super::{seeded_rng, standard_normal, Objective};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm_sq, Matrix};

/// L2-regularized logistic loss
/// `f(x) = (1/m) sum_i log(1 + exp(-b_i a_i^T x)) + (mu/2) |x|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegProblem {
    data: Matrix,
    labels: Vec<f64>,
    mu: f64,
    lip: f64,
}

/// `log(1 + e^u)` without overflow.
#[inline]
pub(crate) fn softplus(u: f64) -> f64 {
    u.max(0.0) + libm::log1p(libm::exp(-libm::fabs(u)))
}

/// Logistic sigmoid `1 / (1 + e^{-u})` without overflow.
#[inline]
pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + libm::exp(-u))
    } else {
        let e = libm::exp(u);
        e / (1.0 + e)
    }
}

/// Upper bound on the gradient Lipschitz constant:
/// `(1/(4m)) sum_i |a_i|^2 + mu`.
pub fn smoothness_bound(data: &Matrix, mu: f64) -> f64 {
    let m = data.rows() as f64;
    row_norm_sq_sum(data) / (4.0 * m) + mu
}

fn row_norm_sq_sum(data: &Matrix) -> f64 {
    (0..data.rows()).map(|i| norm_sq(data.row(i))).sum()
}

/// Regularizer that makes `smoothness_bound(data, mu) / mu == kappa`.
pub fn mu_for_kappa(data: &Matrix, kappa: f64) -> Result<f64> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument("kappa must be > 1"));
    }
    let s = row_norm_sq_sum(data);
    if !(s > 0.0) || data.rows() == 0 {
        return Err(Error::InvalidArgument("data matrix is zero"));
    }
    Ok(s / (4.0 * data.rows() as f64 * (kappa - 1.0)))
}

/// Synthetic instance: `a_i` entries i.i.d. standard normal, `b_i` the sign
/// of an independent standard normal (`+1` on ties), `mu` from
/// [`mu_for_kappa`]. Draw order: the `m x n` data row by row, then the labels.
pub fn generate_logreg(n: usize, m: usize, kappa: f64, seed: u64) -> Result<LogRegProblem> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let entries: Vec<f64> = (0..m * n).map(|_| standard_normal(&mut rng)).collect();
    let data = Matrix::from_row_major(m, n, entries)?;
    let labels: Vec<f64> = (0..m)
        .map(|_| {
            if standard_normal(&mut rng) >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let mu = mu_for_kappa(&data, kappa)?;
    LogRegProblem::new(data, labels, mu)
}

impl LogRegProblem {
    pub fn new(data: Matrix, labels: Vec<f64>, mu: f64) -> Result<Self> {
        check_dim(data.rows(), labels.len())?;
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::InvalidArgument("empty data matrix"));
        }
        if labels.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidArgument("labels must be +1 or -1"));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument("mu must be positive"));
        }
        let lip = smoothness_bound(&data, mu);
        Ok(Self {
            data,
            labels,
            mu,
            lip,
        })
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn samples(&self) -> usize {
        self.data.rows()
    }

    pub fn smoothness_bound(&self) -> f64 {
        self.lip
    }
}

impl Objective for LogRegProblem {
    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn lip(&self) -> f64 {
        self.lip
    }

    fn value(&self, x: &[f64]) -> f64 {
        let m = self.samples();
        let loss: f64 = (0..m)
            .map(|i| softplus(-self.labels[i] * dot(self.data.row(i), x)))
            .sum();
        loss / m as f64 + 0.5 * self.mu * norm_sq(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.value_gradient_into(x, out);
    }

    fn value_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let m = self.samples();
        let inv_m = 1.0 / m as f64;
        for (o, xi) in out.iter_mut().zip(x) {
            *o = self.mu * xi;
        }
        let mut loss = 0.0;
        for i in 0..m {
            let row = self.data.row(i);
            let b = self.labels[i];
            let u = -b * dot(row, x);
            loss += softplus(u);
            // d/dx log(1 + e^{-b a.x}) = -b sigma(-b a.x) a
            let coef = -b * sigmoid(u) * inv_m;
            for (o, a) in out.iter_mut().zip(row) {
                *o += coef * a;
            }
        }
        loss * inv_m + 0.5 * self.mu * norm_sq(x)
    }
}
