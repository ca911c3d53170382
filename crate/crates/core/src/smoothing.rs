//! The smoothing-function contract and the stochastic first-order oracle
//! built on top of it.
//!
//! A smoother `h~_mu` approximates a nonsmooth convex `h` and is certified by
//! four constants ([`SmoothingParams`]):
//!
//! * `|h~_mu1(x) - h~_mu2(x)| <= kappa * |mu1 - mu2|`
//! * `h~_mu` is `(k_const + l_h / mu)`-smooth in `x`
//! * admissible smoothing parameters lie in `(0, mu_bar]`.
//!
//! The same trait is used for a full smoothed objective `f + h~_mu`, in which
//! case `k_const` absorbs the Lipschitz constant of `grad f`.

use rand::RngCore;

use crate::error::{Error, Result};

/// Constants certifying a smoothing function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    /// Lipschitz constant of the smoother with respect to `mu`.
    pub kappa: f64,
    /// The `mu`-independent part of the gradient Lipschitz constant.
    pub k_const: f64,
    /// The part of the gradient Lipschitz constant scaled by `1 / mu`.
    pub l_h: f64,
    /// Upper bound on admissible `mu`.
    pub mu_bar: f64,
}

impl SmoothingParams {
    pub fn new(kappa: f64, k_const: f64, l_h: f64, mu_bar: f64) -> Result<Self> {
        let p = SmoothingParams {
            kappa,
            k_const,
            l_h,
            mu_bar,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.kappa) || !finite_nonneg(self.k_const) || !finite_nonneg(self.l_h)
        {
            return Err(Error::invalid(format!(
                "smoothing constants must be finite and nonnegative: {self:?}"
            )));
        }
        if !(self.mu_bar > 0.0) || !self.mu_bar.is_finite() {
            return Err(Error::invalid(format!("mu_bar must be positive, got {}", self.mu_bar)));
        }
        Ok(())
    }

    /// Gradient Lipschitz constant `K + L_h / mu` at smoothing level `mu`.
    pub fn smoothness_at(&self, mu: f64) -> f64 {
        self.k_const + self.l_h / mu
    }

    pub fn with_mu_bar(mut self, mu_bar: f64) -> Self {
        self.mu_bar = mu_bar;
        self
    }

    pub fn check_mu(&self, mu: f64) -> Result<()> {
        if mu > 0.0 && mu <= self.mu_bar * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::SmoothingOutOfRange {
                mu,
                mu_bar: self.mu_bar,
            })
        }
    }
}

/// Value, gradient and stochastic gradient of a smoothing function.
///
/// Implementations are immutable and may be shared across threads. Each
/// evaluation stream supplies its own rng.
pub trait SmoothedOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn params(&self) -> SmoothingParams;

    /// `h~_mu(x)`.
    fn value(&self, x: &[f64], mu: f64) -> f64;

    /// Writes `grad h~_mu(x)` into `out`.
    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]);

    /// Writes one unbiased draw of the gradient into `out`.
    fn stoch_grad_into(&self, x: &[f64], mu: f64, rng: &mut dyn RngCore, out: &mut [f64]);

    /// The nonsmooth function being approximated. Used for metrics.
    fn nonsmooth_value(&self, x: &[f64]) -> f64;

    /// Average of `m` stochastic gradients, accumulated in draw order.
    ///
    /// Oracles whose draws share expensive work (for example one softmax
    /// pass for many sampled indices) override this. Overrides must draw
    /// from the same distribution and reduce to a single
    /// [`stoch_grad_into`](Self::stoch_grad_into) when `m == 1`.
    fn minibatch_into(&self, x: &[f64], mu: f64, m: usize, rng: &mut dyn RngCore, out: &mut [f64]) {
        // running mean: exact when every draw is the same vector
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut draw = vec![0.0; out.len()];
        for i in 1..=m {
            self.stoch_grad_into(x, mu, rng, &mut draw);
            let w = 1.0 / i as f64;
            for (o, d) in out.iter_mut().zip(&draw) {
                *o += (d - *o) * w;
            }
        }
    }

    fn grad(&self, x: &[f64], mu: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.grad_into(x, mu, &mut out);
        out
    }

    fn stoch_grad(&self, x: &[f64], mu: f64, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.stoch_grad_into(x, mu, rng, &mut out);
        out
    }
}

impl<T: SmoothedOracle + ?Sized> SmoothedOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn params(&self) -> SmoothingParams {
        (**self).params()
    }
    fn value(&self, x: &[f64], mu: f64) -> f64 {
        (**self).value(x, mu)
    }
    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        (**self).grad_into(x, mu, out)
    }
    fn stoch_grad_into(&self, x: &[f64], mu: f64, rng: &mut dyn RngCore, out: &mut [f64]) {
        (**self).stoch_grad_into(x, mu, rng, out)
    }
    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        (**self).nonsmooth_value(x)
    }
    fn minibatch_into(&self, x: &[f64], mu: f64, m: usize, rng: &mut dyn RngCore, out: &mut [f64]) {
        (**self).minibatch_into(x, mu, m, rng, out)
    }
}

/// Mini-batch gradient: the mean of `m` stochastic gradients at `x`.
pub fn minibatch_grad(
    oracle: &dyn SmoothedOracle,
    x: &[f64],
    mu: f64,
    m: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    if x.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: x.len(),
        });
    }
    oracle.params().check_mu(mu)?;
    let mut out = vec![0.0; oracle.dim()];
    oracle.minibatch_into(x, mu, m, rng, &mut out);
    Ok(out)
}

/// Estimates the stochastic-gradient variance bound `sigma^2`.
///
/// At every sample point the empirical trace-variance (mean squared
/// deviation from the empirical mean, `n - 1` normalization) of
/// `draws_per_point` stochastic gradients is computed; the result is the
/// average over points.
pub fn estimate_sigma_sq(
    oracle: &dyn SmoothedOracle,
    sample_points: &[Vec<f64>],
    mu: f64,
    draws_per_point: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if sample_points.is_empty() {
        return Err(Error::invalid("sigma estimation needs at least one sample point"));
    }
    if draws_per_point < 2 {
        return Err(Error::invalid("sigma estimation needs at least two draws per point"));
    }
    let d = oracle.dim();
    let mut total = 0.0;
    let mut draws = vec![0.0; draws_per_point * d];
    let mut mean = vec![0.0; d];
    for p in sample_points {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        mean.iter_mut().for_each(|v| *v = 0.0);
        for (i, chunk) in draws.chunks_exact_mut(d).enumerate() {
            oracle.stoch_grad_into(p, mu, rng, chunk);
            if chunk.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric("non-finite stochastic gradient".into()));
            }
            // running mean, so identical draws give an exact zero
            let w = 1.0 / (i + 1) as f64;
            mean.iter_mut().zip(chunk.iter()).for_each(|(m, g)| *m += (g - *m) * w);
        }
        let ss: f64 = draws
            .chunks_exact(d)
            .map(|g| g.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum();
        total += ss / (draws_per_point - 1) as f64;
    }
    Ok(total / sample_points.len() as f64)
}
