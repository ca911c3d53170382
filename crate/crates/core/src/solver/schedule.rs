//! Step-size and smoothing schedules for the accelerated method.
//!
//! ```text
//! alpha_0 = 1,   (1 - alpha_k) / alpha_k^2 = 1 / alpha_{k-1}^2
//! mu_k    = mu_0 * alpha_{k-1}                  (diminishing mode)
//! beta_1  = L_{mu_1} + 1 / sqrt(m)
//! beta_k  = max(beta_{k-1}, L_{mu_k} + 1 / (sqrt(m k) alpha_{k-1}^2))
//! theta_k = 2 alpha_{k-1} beta_k
//! ```
//!
//! where `L_mu = L_f + K + L_h / mu`.

use crate::error::{Error, Result};
use crate::smoothing::SmoothingParams;

/// Positive root of `a^2 + p^2 a - p^2 = 0` for `p = alpha_prev`.
pub fn next_alpha(alpha_prev: f64) -> Result<f64> {
    if !(alpha_prev > 0.0 && alpha_prev <= 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha_prev}")));
    }
    Ok(alpha_root(alpha_prev))
}

#[inline]
fn alpha_root(p: f64) -> f64 {
    // p (sqrt(p^2 + 4) - p) / 2, rationalized to avoid cancellation
    2.0 * p / (p + (p * p + 4.0).sqrt())
}

/// `max(beta_prev, L_mu_next + 1 / (sqrt(m * k_next) * alpha_k^2))`.
pub fn next_beta(beta_prev: f64, l_mu_next: f64, m: usize, k_next: u64, alpha_k: f64) -> f64 {
    let fresh = l_mu_next + 1.0 / (((m as f64) * (k_next as f64)).sqrt() * alpha_k * alpha_k);
    beta_prev.max(fresh)
}

/// `beta_1 = L_{mu_1} + 1 / sqrt(m)`.
pub fn initial_beta(l_mu_1: f64, m: usize) -> f64 {
    l_mu_1 + 1.0 / (m as f64).sqrt()
}

/// Iteration limit `ceil(24 kappa mu0 / eps + 8 sigma^4 / (m eps^2)) - 1`,
/// floored at 1.
pub fn iteration_limit(epsilon: f64, kappa: f64, mu0: f64, sigma: f64, m: usize) -> Result<u64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if m == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let raw = 24.0 * kappa * mu0 / epsilon + 8.0 * sigma.powi(4) / (m as f64 * epsilon * epsilon);
    if !raw.is_finite() {
        return Err(Error::Numeric(format!("iteration limit overflows: {raw}")));
    }
    // values within rounding noise of an integer count as that integer
    let r = raw.round();
    let ceil = if (raw - r).abs() <= 1e-9 * r.abs().max(1.0) { r } else { raw.ceil() };
    Ok(((ceil - 1.0).max(1.0)) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingMode {
    /// `mu_k = mu_0 alpha_{k-1}`.
    Diminishing,
    /// `mu_k` held at the given value.
    Fixed(f64),
}

/// Per-iteration scalars of the accelerated method, positioned at iteration `k`.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    pub k: u64,
    /// `alpha_{k-1}`.
    pub alpha_prev: f64,
    pub mu_k: f64,
    pub beta_k: f64,
    pub theta_k: f64,
    pub mu0: f64,
    pub m: usize,
    pub mode: SmoothingMode,
    /// Constants of the smoothed objective; `k_const` includes `L_f`.
    pub params: SmoothingParams,
}

impl ScheduleState {
    /// State at `k = 1`. `mu_bar` is set to the largest `mu` the schedule
    /// will ever use.
    pub fn new(mu0: f64, m: usize, mode: SmoothingMode, params: SmoothingParams) -> Result<Self> {
        if !(mu0 > 0.0) || !mu0.is_finite() {
            return Err(Error::invalid(format!("mu0 must be positive, got {mu0}")));
        }
        if m == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        let mu_1 = match mode {
            SmoothingMode::Diminishing => mu0,
            SmoothingMode::Fixed(mu) => {
                if !(mu > 0.0) || !mu.is_finite() {
                    return Err(Error::invalid(format!("fixed mu must be positive, got {mu}")));
                }
                mu
            }
        };
        let params = params.with_mu_bar(mu_1);
        params.validate()?;
        let beta = initial_beta(params.smoothness_at(mu_1), m);
        Ok(ScheduleState {
            k: 1,
            alpha_prev: 1.0,
            mu_k: mu_1,
            beta_k: beta,
            theta_k: 2.0 * beta,
            mu0,
            m,
            mode,
            params,
        })
    }

    /// `L_{mu_k}`.
    pub fn l_mu(&self) -> f64 {
        self.params.smoothness_at(self.mu_k)
    }

    pub fn advance(&mut self) {
        let alpha_k = alpha_root(self.alpha_prev);
        let k_next = self.k + 1;
        let mu_next = match self.mode {
            SmoothingMode::Diminishing => self.mu0 * alpha_k,
            SmoothingMode::Fixed(mu) => mu,
        };
        let beta_next = next_beta(self.beta_k, self.params.smoothness_at(mu_next), self.m, k_next, alpha_k);
        self.k = k_next;
        self.alpha_prev = alpha_k;
        self.mu_k = mu_next;
        self.beta_k = beta_next;
        self.theta_k = 2.0 * alpha_k * beta_next;
    }

    pub fn check(&self) -> Result<()> {
        let l = self.l_mu();
        if self.beta_k > l && self.theta_k > 0.0 && self.mu_k > 0.0 {
            Ok(())
        } else {
            Err(Error::ScheduleViolation { k: self.k, beta: self.beta_k, l_mu: l })
        }
    }
}
