//! Wasserstein distributionally robust SVM in its cone-constrained form
//!
//! ```text
//! min  lambda eps + tau/2 |w|^2 + mean_i max(1 - w.z_i, 1 + w.z_i - lambda kappa, 0)
//! s.t. |w| <= lambda
//! ```
//!
//! with `z_i = y_i x_i`. The three-way max is smoothed per sample by
//! log-sum-exp, so `kappa = ln 3`, `K = 0` and `L_h` is the top eigenvalue
//! of `mean_i [[2 z z^T, -kappa z], [-kappa z^T, 3/4 kappa^2]]`.
//! Variables are packed as `(w, lambda)`.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use crate::data::SparseDataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::{digest, f64_bytes, Problem};
use crate::projection::FeasibleSet;
use crate::smoothers::{log_sum_exp, softmax_into};
use crate::smoothing::{SmoothedOracle, SmoothingParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrsvmOptions {
    /// Ridge weight on `w`.
    pub tau: f64,
    /// Wasserstein radius.
    pub eps_hat: f64,
    /// Label-flip transport cost.
    pub kappa_hat: f64,
    pub mu_bar: f64,
}

impl Default for DrsvmOptions {
    fn default() -> Self {
        DrsvmOptions { tau: 0.0, eps_hat: 0.1, kappa_hat: 1.0, mu_bar: 1.0 }
    }
}

pub struct DrsvmInstance {
    d: usize,
    n: usize,
    /// Row-major `n x d` matrix of signed samples.
    z_hat: Vec<f64>,
    opts: DrsvmOptions,
    l_h: f64,
    set: FeasibleSet,
    eval: SparseDataset,
}

impl DrsvmInstance {
    /// Builds the instance from training data; accuracy is reported on
    /// `eval` when given, on the training data otherwise.
    pub fn new(train: &SparseDataset, opts: DrsvmOptions, eval: Option<SparseDataset>) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Data("DRSVM needs at least one training sample".into()));
        }
        if !(opts.tau >= 0.0 && opts.eps_hat > 0.0 && opts.kappa_hat > 0.0 && opts.mu_bar > 0.0) {
            return Err(Error::invalid(format!("invalid DRSVM options {opts:?}")));
        }
        let d = train.n_features;
        let n = train.n_samples();
        let mut z_hat = vec![0.0; n * d];
        for (i, (y, row)) in train.labels.iter().zip(&train.rows).enumerate() {
            for (j, v) in row {
                z_hat[i * d + j] = y * v;
            }
        }
        let k = opts.kappa_hat;
        let mut block = DMatrix::<f64>::zeros(d + 1, d + 1);
        for z in z_hat.chunks_exact(d) {
            for a in 0..d {
                if z[a] == 0.0 {
                    continue;
                }
                for b in 0..d {
                    block[(a, b)] += 2.0 * z[a] * z[b];
                }
                block[(a, d)] -= k * z[a];
                block[(d, a)] -= k * z[a];
            }
            block[(d, d)] += 0.75 * k * k;
        }
        block /= n as f64;
        let l_h = linalg::lambda_max(&block).max(0.0);
        Ok(DrsvmInstance {
            d,
            n,
            z_hat,
            opts,
            l_h,
            set: FeasibleSet::SecondOrderCone(d + 1),
            eval: eval.unwrap_or_else(|| train.clone()),
        })
    }

    pub fn options(&self) -> DrsvmOptions {
        self.opts
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    fn z(&self, i: usize) -> &[f64] {
        &self.z_hat[i * self.d..(i + 1) * self.d]
    }

    fn pieces(&self, i: usize, x: &[f64]) -> [f64; 3] {
        let (w, lam) = (&x[..self.d], x[self.d]);
        let t = linalg::dot(w, self.z(i));
        [1.0 - t, 1.0 + t - lam * self.opts.kappa_hat, 0.0]
    }

    fn smooth_part(&self, x: &[f64]) -> f64 {
        let (w, lam) = (&x[..self.d], x[self.d]);
        lam * self.opts.eps_hat + 0.5 * self.opts.tau * linalg::norm_sq(w)
    }

    fn add_smooth_grad(&self, x: &[f64], out: &mut [f64]) {
        for (o, w) in out[..self.d].iter_mut().zip(&x[..self.d]) {
            *o += self.opts.tau * w;
        }
        out[self.d] += self.opts.eps_hat;
    }

    /// `out += weight * grad` of the smoothed loss of sample `i`.
    fn add_sample_grad(&self, i: usize, x: &[f64], mu: f64, weight: f64, out: &mut [f64]) {
        let v = self.pieces(i, x);
        let mut p = [0.0; 3];
        softmax_into(&v, mu, &mut p);
        linalg::axpy(weight * (p[1] - p[0]), self.z(i), &mut out[..self.d]);
        out[self.d] -= weight * self.opts.kappa_hat * p[1];
    }

    /// True objective.
    pub fn true_objective(&self, w: &[f64], lam: f64) -> f64 {
        let mut x = w.to_vec();
        x.push(lam);
        self.nonsmooth_value(&x)
    }
}

/// Fraction of samples with `sign(<w, x>) == y`, where `sign(0) = +1`.
pub fn drsvm_accuracy(data: &SparseDataset, w: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Data("accuracy of an empty dataset".into()));
    }
    let correct = (0..data.n_samples())
        .filter(|&i| {
            let pred = if data.row_dot(i, w) >= 0.0 { 1.0 } else { -1.0 };
            pred == data.labels[i]
        })
        .count();
    Ok(correct as f64 / data.n_samples() as f64)
}

impl SmoothedOracle for DrsvmInstance {
    fn dim(&self) -> usize {
        self.d + 1
    }

    fn params(&self) -> SmoothingParams {
        SmoothingParams {
            kappa: 3f64.ln(),
            k_const: self.opts.tau,
            l_h: self.l_h,
            mu_bar: self.opts.mu_bar,
        }
    }

    fn value(&self, x: &[f64], mu: f64) -> f64 {
        let loss: f64 = (0..self.n).map(|i| log_sum_exp(&self.pieces(i, x), mu)).sum();
        self.smooth_part(x) + loss / self.n as f64
    }

    fn grad_into(&self, x: &[f64], mu: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let w = 1.0 / self.n as f64;
        for i in 0..self.n {
            self.add_sample_grad(i, x, mu, w, out);
        }
        self.add_smooth_grad(x, out);
    }

    fn stoch_grad_into(&self, x: &[f64], mu: f64, rng: &mut dyn RngCore, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let i = rng.random_range(0..self.n);
        self.add_sample_grad(i, x, mu, 1.0, out);
        self.add_smooth_grad(x, out);
    }

    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        let loss: f64 = (0..self.n)
            .map(|i| self.pieces(i, x).into_iter().fold(f64::NEG_INFINITY, f64::max))
            .sum();
        self.smooth_part(x) + loss / self.n as f64
    }
}

impl Problem for DrsvmInstance {
    fn name(&self) -> &str {
        "drsvm"
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.d + 1]
    }

    fn subgrad_batch_into(&self, x: &[f64], m: usize, rng: &mut dyn RngCore, out: &mut [f64]) -> u64 {
        out.iter_mut().for_each(|o| *o = 0.0);
        let wt = 1.0 / m as f64;
        for _ in 0..m {
            let i = rng.random_range(0..self.n);
            let v = self.pieces(i, x);
            let j = super::synthetic::argmax(&v);
            match j {
                0 => linalg::axpy(-wt, self.z(i), &mut out[..self.d]),
                1 => {
                    linalg::axpy(wt, self.z(i), &mut out[..self.d]);
                    out[self.d] -= wt * self.opts.kappa_hat;
                }
                _ => {}
            }
        }
        self.add_smooth_grad(x, out);
        m as u64
    }

    fn accuracy(&self, x: &[f64]) -> Option<f64> {
        drsvm_accuracy(&self.eval, &x[..self.d]).ok()
    }

    fn sample_count(&self) -> usize {
        self.n
    }

    fn fingerprint(&self) -> String {
        let o = self.opts;
        digest(&[
            b"drsvm",
            &f64_bytes(&self.z_hat),
            &f64_bytes(&[o.tau, o.eps_hat, o.kappa_hat, self.d as f64]),
        ])
    }
}
