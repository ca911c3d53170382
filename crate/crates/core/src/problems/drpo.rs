//! Distributionally robust portfolio selection over a moment ambiguity set,
//! discretized on the observed return scenarios:
//!
//! ```text
//! min  max_xi  -<zeta_xi, x> - <L1, phi1(zeta_xi)> - <L2, phi2(zeta_xi)>
//! s.t. x in simplex, L1 in PSD(d + 1), L2 in PSD(d)
//!
//! phi1(z) = [[-S, m - z], [(m - z)^T, -gamma1]]
//! phi2(z) = (z - m)(z - m)^T - gamma2 S
//! ```
//!
//! where `m`, `S` are the sample mean and covariance. Every piece is affine,
//! so the log-sum-exp smoother has `K = 0` and an exact `L_h`.
//! The flat iterate is `(x, svec(L1), svec(L2))`.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::{digest, f64_bytes, Problem};
use crate::projection::{project_psd, FeasibleSet};
use crate::smoothers::{AffineFamily, ComponentFamily, LogSumExpMaxSmoother};
use crate::smoothing::{SmoothedOracle, SmoothingParams};

/// Sample mean and unbiased sample covariance of the rows of `returns`.
///
/// The covariance is symmetrized and, if rounding left an eigenvalue below
/// `-1e-12`, projected onto the PSD cone.
pub fn estimate_moments(returns: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let q = returns.nrows();
    if q < 2 {
        return Err(Error::Data(format!("need at least 2 return samples, got {q}")));
    }
    let mean = returns.row_mean().transpose();
    let mut centered = returns.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.transpose() * &centered / (q - 1) as f64;
    let cov = (&cov + cov.transpose()) * 0.5;
    let min_eig = cov.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    let cov = if min_eig < -1e-12 { project_psd(&cov)? } else { cov };
    Ok((mean, cov))
}

/// A point `(x, L1, L2)` in unpacked form.
#[derive(Debug, Clone, PartialEq)]
pub struct DrpoPoint {
    pub x: Vec<f64>,
    pub lambda1: DMatrix<f64>,
    pub lambda2: DMatrix<f64>,
}

impl DrpoPoint {
    /// Uniform weights, zero multipliers.
    pub fn initial(d: usize) -> Self {
        DrpoPoint {
            x: vec![1.0 / d as f64; d],
            lambda1: DMatrix::zeros(d + 1, d + 1),
            lambda2: DMatrix::zeros(d, d),
        }
    }

    pub fn pack(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend(linalg::svec(&self.lambda1));
        v.extend(linalg::svec(&self.lambda2));
        v
    }

    pub fn unpack(v: &[f64], d: usize) -> Result<Self> {
        let (n1, n2) = (linalg::svec_len(d + 1), linalg::svec_len(d));
        if v.len() != d + n1 + n2 {
            return Err(Error::DimensionMismatch { expected: d + n1 + n2, got: v.len() });
        }
        Ok(DrpoPoint {
            x: v[..d].to_vec(),
            lambda1: linalg::smat(&v[d..d + n1], d + 1),
            lambda2: linalg::smat(&v[d + n1..], d),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrpoOptions {
    pub gamma1: f64,
    pub gamma2: f64,
    pub mu_bar: f64,
}

impl Default for DrpoOptions {
    fn default() -> Self {
        DrpoOptions { gamma1: 0.1, gamma2: 1.1, mu_bar: 1.0 }
    }
}

pub struct DrpoInstance {
    d: usize,
    returns: DMatrix<f64>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    opts: DrpoOptions,
    smoother: LogSumExpMaxSmoother<AffineFamily>,
    set: FeasibleSet,
}

impl DrpoInstance {
    /// Builds the instance from a `q x d` matrix of scenario returns, with
    /// moments estimated from the same scenarios.
    pub fn new(returns: &DMatrix<f64>, opts: DrpoOptions) -> Result<Self> {
        let (mean, cov) = estimate_moments(returns)?;
        Self::with_moments(returns, mean, cov, opts)
    }

    pub fn with_moments(
        returns: &DMatrix<f64>,
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        opts: DrpoOptions,
    ) -> Result<Self> {
        let d = returns.ncols();
        if d == 0 || returns.nrows() == 0 {
            return Err(Error::Data("empty returns matrix".into()));
        }
        if mean.len() != d || cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: mean.len() });
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite return".into()));
        }
        let mut inst = DrpoInstance {
            d,
            returns: returns.clone(),
            mean,
            cov,
            opts,
            smoother: LogSumExpMaxSmoother::new(AffineFamily::new(1, vec![0.0], vec![0.0])?, opts.mu_bar)?,
            set: FeasibleSet::Product(vec![
                FeasibleSet::Simplex(d),
                FeasibleSet::PsdCone(d + 1),
                FeasibleSet::PsdCone(d),
            ]),
        };
        let dim = inst.set.dim();
        let mut rows = Vec::with_capacity(returns.nrows() * dim);
        for xi in 0..returns.nrows() {
            let z = returns.row(xi).transpose();
            rows.extend(z.iter().map(|v| -v));
            rows.extend(linalg::svec(&inst.phi1(&z)).iter().map(|v| -v));
            rows.extend(linalg::svec(&inst.phi2(&z)).iter().map(|v| -v));
        }
        let family = AffineFamily::new(dim, rows, vec![0.0; returns.nrows()])?;
        inst.smoother = LogSumExpMaxSmoother::new(family, opts.mu_bar)?;
        Ok(inst)
    }

    pub fn n_assets(&self) -> usize {
        self.d
    }

    pub fn n_scenarios(&self) -> usize {
        self.returns.nrows()
    }

    pub fn moments(&self) -> (&DVector<f64>, &DMatrix<f64>) {
        (&self.mean, &self.cov)
    }

    pub fn smoother(&self) -> &LogSumExpMaxSmoother<AffineFamily> {
        &self.smoother
    }

    fn phi1(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let d = self.d;
        let mut m = DMatrix::zeros(d + 1, d + 1);
        m.view_mut((0, 0), (d, d)).copy_from(&(-&self.cov));
        let diff = &self.mean - z;
        for i in 0..d {
            m[(i, d)] = diff[i];
            m[(d, i)] = diff[i];
        }
        m[(d, d)] = -self.opts.gamma1;
        m
    }

    fn phi2(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let diff = z - &self.mean;
        &diff * diff.transpose() - &self.cov * self.opts.gamma2
    }

    /// `h_xi` at an unpacked point.
    pub fn component_value(&self, xi: usize, p: &DrpoPoint) -> Result<f64> {
        if xi >= self.n_scenarios() {
            return Err(Error::invalid(format!("scenario {xi} out of range 0..{}", self.n_scenarios())));
        }
        if p.x.len() != self.d || p.lambda1.shape() != (self.d + 1, self.d + 1) || p.lambda2.shape() != (self.d, self.d) {
            return Err(Error::DimensionMismatch { expected: self.d, got: p.x.len() });
        }
        let fam = self.smoother.family();
        Ok(linalg::dot(fam.row(xi), &p.pack()) + fam.offset(xi))
    }
}

impl SmoothedOracle for DrpoInstance {
    fn dim(&self) -> usize {
        self.set.dim()
    }

    fn params(&self) -> SmoothingParams {
        self.smoother.params()
    }

    fn value(&self, x: &[f64], mu: f64) -> f64 {
        self.smoother.value(x, mu)
    }

    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        self.smoother.grad_into(x, mu, out)
    }

    fn stoch_grad_into(&self, x: &[f64], mu: f64, rng: &mut dyn RngCore, out: &mut [f64]) {
        self.smoother.stoch_grad_into(x, mu, rng, out)
    }

    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        self.smoother.nonsmooth_value(x)
    }

    fn minibatch_into(&self, x: &[f64], mu: f64, m: usize, rng: &mut dyn RngCore, out: &mut [f64]) {
        self.smoother.minibatch_into(x, mu, m, rng, out)
    }
}

impl Problem for DrpoInstance {
    fn name(&self) -> &str {
        "drpo"
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn initial_point(&self) -> Vec<f64> {
        DrpoPoint::initial(self.d).pack()
    }

    fn subgrad_batch_into(&self, x: &[f64], _m: usize, _rng: &mut dyn RngCore, out: &mut [f64]) -> u64 {
        let vals = self.smoother.component_values(x);
        let best = super::synthetic::argmax(&vals);
        out.iter_mut().for_each(|o| *o = 0.0);
        self.smoother.family().add_grad(best, x, 1.0, out);
        self.n_scenarios() as u64
    }

    fn sample_count(&self) -> usize {
        self.n_scenarios()
    }

    fn fingerprint(&self) -> String {
        digest(&[
            b"drpo",
            &f64_bytes(self.returns.as_slice()),
            &f64_bytes(&[self.opts.gamma1, self.opts.gamma2, self.d as f64]),
        ])
    }
}
