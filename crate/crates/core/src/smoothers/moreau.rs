//! Moreau envelope of the scalar hinge `t -> max(t, 0)`.

use rand::RngCore;

use crate::smoothing::{SmoothedOracle, SmoothingParams};

/// Envelope value and derivative of the hinge at `t`.
pub fn moreau_hinge(t: f64, mu: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t < mu {
        (t * t / (2.0 * mu), t / mu)
    } else {
        (t - 0.5 * mu, 1.0)
    }
}

/// The hinge envelope as a one-dimensional smoothing oracle. Vector
/// problems compose [`moreau_hinge`] with their own affine maps.
#[derive(Debug, Clone, Copy)]
pub struct MoreauHingeSmoother {
    mu_bar: f64,
}

impl MoreauHingeSmoother {
    pub fn new(mu_bar: f64) -> Self {
        MoreauHingeSmoother { mu_bar }
    }
}

impl SmoothedOracle for MoreauHingeSmoother {
    fn dim(&self) -> usize {
        1
    }

    fn params(&self) -> SmoothingParams {
        SmoothingParams {
            kappa: 0.5,
            k_const: 0.0,
            l_h: 1.0,
            mu_bar: self.mu_bar,
        }
    }

    fn value(&self, x: &[f64], mu: f64) -> f64 {
        moreau_hinge(x[0], mu).0
    }

    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        out[0] = moreau_hinge(x[0], mu).1;
    }

    fn stoch_grad_into(&self, x: &[f64], mu: f64, _rng: &mut dyn RngCore, out: &mut [f64]) {
        self.grad_into(x, mu, out);
    }

    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        x[0].max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `min_y max(y, 0) + (t - y)^2 / (2 mu)` by a fine scan around `t`.
    fn envelope_by_scan(t: f64, mu: f64) -> f64 {
        let mut best = f64::INFINITY;
        for i in -200_000..=200_000 {
            let y = t + i as f64 * 1e-5;
            best = best.min(y.max(0.0) + (t - y).powi(2) / (2.0 * mu));
        }
        best
    }

    #[test]
    fn negative_branch() {
        assert_eq!(moreau_hinge(-1.0, 0.3), (0.0, 0.0));
    }

    #[test]
    fn quadratic_branch() {
        let mu = 0.8;
        let (v, d) = moreau_hinge(mu / 2.0, mu);
        assert!((v - mu / 8.0).abs() < 1e-15 && (d - 0.5).abs() < 1e-15);
        assert!((v - envelope_by_scan(mu / 2.0, mu)).abs() < 1e-8);
    }

    #[test]
    fn linear_branch() {
        assert_eq!(moreau_hinge(2.0, 1.0), (1.5, 1.0));
        assert!((1.5 - envelope_by_scan(2.0, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn continuous_at_breakpoints() {
        let mu = 0.37;
        let (a, da) = moreau_hinge(mu - 1e-12, mu);
        let (b, db) = moreau_hinge(mu, mu);
        assert!((a - b).abs() < 1e-11 && (da - db).abs() < 1e-10);
    }
}
