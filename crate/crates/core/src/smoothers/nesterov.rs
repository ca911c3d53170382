//! Nesterov smoothing of `h(x) = max_{u in simplex} <Ax + c, u>` with the
//! prox term `d(u) = 0.5 |u - center|^2`.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg;
use crate::projection::project_simplex;
use crate::smoothing::{SmoothedOracle, SmoothingParams};

#[derive(Debug, Clone)]
pub struct NesterovSimplexMaxSmoother {
    q: usize,
    dim: usize,
    rows: Vec<f64>,
    offsets: Vec<f64>,
    prox_center: Vec<f64>,
    kappa: f64,
    l_h: f64,
    mu_bar: f64,
}

impl NesterovSimplexMaxSmoother {
    /// `rows` is the row-major `q x dim` matrix `A`; the prox center
    /// defaults to the uniform vector.
    pub fn new(dim: usize, rows: Vec<f64>, offsets: Vec<f64>, mu_bar: f64) -> Result<Self> {
        let q = offsets.len();
        let center = vec![1.0 / q.max(1) as f64; q];
        Self::with_center(dim, rows, offsets, center, mu_bar)
    }

    pub fn with_center(
        dim: usize,
        rows: Vec<f64>,
        offsets: Vec<f64>,
        prox_center: Vec<f64>,
        mu_bar: f64,
    ) -> Result<Self> {
        let q = offsets.len();
        if q == 0 || dim == 0 {
            return Err(Error::invalid("Nesterov smoother needs q >= 1 and dim >= 1"));
        }
        if rows.len() != q * dim {
            return Err(Error::DimensionMismatch { expected: q * dim, got: rows.len() });
        }
        if prox_center.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: prox_center.len() });
        }
        let sum: f64 = prox_center.iter().sum();
        if prox_center.iter().any(|c| *c < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("prox center must lie in the simplex"));
        }
        // max of a convex function over the simplex sits at a vertex
        let kappa = (0..q)
            .map(|i| {
                0.5 * prox_center
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let e = if i == j { 1.0 } else { 0.0 };
                        (e - c) * (e - c)
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let l_h = linalg::spectral_norm_sq(&rows, q, dim);
        let s = NesterovSimplexMaxSmoother {
            q,
            dim,
            rows,
            offsets,
            prox_center,
            kappa,
            l_h,
            mu_bar,
        };
        s.params().validate()?;
        Ok(s)
    }

    fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .chunks_exact(self.dim)
            .zip(&self.offsets)
            .map(|(r, c)| linalg::dot(r, x) + c)
            .collect()
    }

    /// The inner maximizer `u_mu(x) = P_simplex(center + (Ax + c) / mu)`.
    pub fn inner_argmax(&self, x: &[f64], mu: f64) -> Vec<f64> {
        let s = self.scores(x);
        let v: Vec<f64> = self.prox_center.iter().zip(&s).map(|(c, s)| c + s / mu).collect();
        project_simplex(&v).expect("q >= 1")
    }

    /// Smoothed value and gradient `A^T u_mu(x)`.
    pub fn value_grad(&self, x: &[f64], mu: f64) -> (f64, Vec<f64>) {
        let s = self.scores(x);
        let v: Vec<f64> = self.prox_center.iter().zip(&s).map(|(c, s)| c + s / mu).collect();
        let u = project_simplex(&v).expect("q >= 1");
        let value = linalg::dot(&s, &u) - 0.5 * mu * linalg::dist(&u, &self.prox_center).powi(2);
        let mut g = vec![0.0; self.dim];
        for (ui, row) in u.iter().zip(self.rows.chunks_exact(self.dim)) {
            if *ui != 0.0 {
                linalg::axpy(*ui, row, &mut g);
            }
        }
        (value, g)
    }

    pub fn prox_center(&self) -> &[f64] {
        &self.prox_center
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

impl SmoothedOracle for NesterovSimplexMaxSmoother {
    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> SmoothingParams {
        SmoothingParams {
            kappa: self.kappa,
            k_const: 0.0,
            l_h: self.l_h,
            mu_bar: self.mu_bar,
        }
    }

    fn value(&self, x: &[f64], mu: f64) -> f64 {
        self.value_grad(x, mu).0
    }

    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.value_grad(x, mu).1);
    }

    /// The linear-max has a single scenario; draws are exact.
    fn stoch_grad_into(&self, x: &[f64], mu: f64, _rng: &mut dyn RngCore, out: &mut [f64]) {
        self.grad_into(x, mu, out);
    }

    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        self.scores(x).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}
