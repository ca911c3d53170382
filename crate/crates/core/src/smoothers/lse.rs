//! Log-sum-exp smoothing of a finite maximum `h(x) = max_xi h_xi(x)`:
//!
//! ```text
//! h~_mu(x)    = mu * ln sum_xi exp(h_xi(x) / mu)
//! grad h~_mu  = sum_xi p(xi) grad h_xi(x),   p = softmax(h(x) / mu)
//! ```
//!
//! with `kappa = ln q`, `K = max_xi L_{h_xi}` and `L_h = max |grad h_xi|^2`.
//! Stochastic gradients sample `xi ~ p` and return `grad h_xi(x)`.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::linalg;
use crate::smoothing::{SmoothedOracle, SmoothingParams};

/// Max-stabilized `mu * ln sum exp(v_i / mu)`.
pub fn log_sum_exp(values: &[f64], mu: f64) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| ((v - max) / mu).exp()).sum();
    max + mu * s.ln()
}

/// Max-stabilized softmax of `values / mu`, written into `out`.
pub fn softmax_into(values: &[f64], mu: f64, out: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (o, v) in out.iter_mut().zip(values) {
        *o = ((v - max) / mu).exp();
        s += *o;
    }
    for o in out.iter_mut() {
        *o /= s;
    }
}

/// Inverse-CDF draw from normalized `weights`; ties go to the lowest index.
pub fn sample_index(weights: &[f64], rng: &mut dyn RngCore) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc > target {
            return i;
        }
    }
    // Rounding left the target at the end of the CDF.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// A finite family of smooth convex functions `h_1, ..., h_q` on `R^dim`.
pub trait ComponentFamily: Send + Sync {
    fn count(&self) -> usize;

    fn dim(&self) -> usize;

    /// Writes `h_xi(x)` for every `xi`.
    fn values_into(&self, x: &[f64], out: &mut [f64]);

    /// `out += weight * grad h_xi(x)`.
    fn add_grad(&self, xi: usize, x: &[f64], weight: f64, out: &mut [f64]);

    /// `max_xi L_{h_xi}`.
    fn lipschitz_max(&self) -> f64;

    /// An upper bound on `|grad h_xi(x)|^2` over the feasible set.
    fn grad_norm_sq_max(&self) -> f64;
}

/// Affine components `h_xi(x) = <a_xi, x> + b_xi`, stored row-major.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    dim: usize,
    rows: Vec<f64>,
    offsets: Vec<f64>,
    grad_norm_sq_max: f64,
}

impl AffineFamily {
    pub fn new(dim: usize, rows: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        if dim == 0 || offsets.is_empty() {
            return Err(Error::invalid("affine family needs dim >= 1 and q >= 1"));
        }
        if rows.len() != dim * offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * offsets.len(),
                got: rows.len(),
            });
        }
        let grad_norm_sq_max = rows
            .chunks_exact(dim)
            .map(linalg::norm_sq)
            .fold(0.0, f64::max);
        Ok(AffineFamily {
            dim,
            rows,
            offsets,
            grad_norm_sq_max,
        })
    }

    pub fn row(&self, xi: usize) -> &[f64] {
        &self.rows[xi * self.dim..(xi + 1) * self.dim]
    }

    pub fn offset(&self, xi: usize) -> f64 {
        self.offsets[xi]
    }
}

impl ComponentFamily for AffineFamily {
    fn count(&self) -> usize {
        self.offsets.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn values_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, row), b) in out.iter_mut().zip(self.rows.chunks_exact(self.dim)).zip(&self.offsets) {
            *o = linalg::dot(row, x) + b;
        }
    }

    fn add_grad(&self, xi: usize, _x: &[f64], weight: f64, out: &mut [f64]) {
        linalg::axpy(weight, self.row(xi), out);
    }

    fn lipschitz_max(&self) -> f64 {
        0.0
    }

    fn grad_norm_sq_max(&self) -> f64 {
        self.grad_norm_sq_max
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Components given as closures, with caller-certified constants.
pub struct FnFamily {
    dim: usize,
    values: Vec<ValueFn>,
    grads: Vec<GradFn>,
    lips: Vec<f64>,
    grad_norm_sq_max: f64,
}

impl FnFamily {
    pub fn new(dim: usize, grad_norm_sq_max: f64) -> Self {
        FnFamily {
            dim,
            values: Vec::new(),
            grads: Vec::new(),
            lips: Vec::new(),
            grad_norm_sq_max,
        }
    }

    /// Adds a component; `grad` writes (not accumulates) the gradient.
    pub fn push(
        mut self,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        lipschitz: f64,
    ) -> Self {
        self.values.push(Box::new(value));
        self.grads.push(Box::new(grad));
        self.lips.push(lipschitz);
        self
    }
}

impl ComponentFamily for FnFamily {
    fn count(&self) -> usize {
        self.values.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn values_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.values) {
            *o = f(x);
        }
    }

    fn add_grad(&self, xi: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let mut g = vec![0.0; self.dim];
        (self.grads[xi])(x, &mut g);
        linalg::axpy(weight, &g, out);
    }

    fn lipschitz_max(&self) -> f64 {
        self.lips.iter().copied().fold(0.0, f64::max)
    }

    fn grad_norm_sq_max(&self) -> f64 {
        self.grad_norm_sq_max
    }
}

/// Log-sum-exp smoother of `max_xi h_xi`.
pub struct LogSumExpMaxSmoother<C> {
    family: C,
    mu_bar: f64,
}

impl<C: ComponentFamily> LogSumExpMaxSmoother<C> {
    pub fn new(family: C, mu_bar: f64) -> Result<Self> {
        if family.count() == 0 {
            return Err(Error::invalid("log-sum-exp smoother needs at least one component"));
        }
        let s = LogSumExpMaxSmoother { family, mu_bar };
        s.params().validate()?;
        Ok(s)
    }

    pub fn family(&self) -> &C {
        &self.family
    }

    pub fn component_values(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.family.count()];
        self.family.values_into(x, &mut v);
        v
    }

    /// Softmax weights `p_{x,mu}`.
    pub fn weights(&self, x: &[f64], mu: f64) -> Vec<f64> {
        let v = self.component_values(x);
        let mut p = vec![0.0; v.len()];
        softmax_into(&v, mu, &mut p);
        p
    }

    pub fn lse_value(&self, x: &[f64], mu: f64) -> f64 {
        log_sum_exp(&self.component_values(x), mu)
    }

    pub fn lse_grad(&self, x: &[f64], mu: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.family.dim()];
        self.grad_into(x, mu, &mut g);
        g
    }

    pub fn lse_sample_index(&self, x: &[f64], mu: f64, rng: &mut dyn RngCore) -> usize {
        sample_index(&self.weights(x, mu), rng)
    }
}

impl<C: ComponentFamily> SmoothedOracle for LogSumExpMaxSmoother<C> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn params(&self) -> SmoothingParams {
        SmoothingParams {
            kappa: (self.family.count() as f64).ln(),
            k_const: self.family.lipschitz_max(),
            l_h: self.family.grad_norm_sq_max(),
            mu_bar: self.mu_bar,
        }
    }

    fn value(&self, x: &[f64], mu: f64) -> f64 {
        self.lse_value(x, mu)
    }

    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        let p = self.weights(x, mu);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (xi, w) in p.iter().enumerate() {
            if *w > 0.0 {
                self.family.add_grad(xi, x, *w, out);
            }
        }
    }

    fn stoch_grad_into(&self, x: &[f64], mu: f64, rng: &mut dyn RngCore, out: &mut [f64]) {
        let xi = self.lse_sample_index(x, mu, rng);
        out.iter_mut().for_each(|o| *o = 0.0);
        self.family.add_grad(xi, x, 1.0, out);
    }

    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        self.component_values(x)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn minibatch_into(&self, x: &[f64], mu: f64, m: usize, rng: &mut dyn RngCore, out: &mut [f64]) {
        // one softmax pass serves every draw in the batch
        let p = self.weights(x, mu);
        out.iter_mut().for_each(|o| *o = 0.0);
        let w = 1.0 / m as f64;
        for _ in 0..m {
            let xi = sample_index(&p, rng);
            self.family.add_grad(xi, x, w, out);
        }
    }
}
