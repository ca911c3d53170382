use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::linalg;
use crate::problems::{digest, f64_bytes, Problem};
use crate::projection::FeasibleSet;
use crate::smoothers::{AffineFamily, ComponentFamily, LogSumExpMaxSmoother};
use crate::smoothing::{SmoothedOracle, SmoothingParams};

/// `0.5 |x|^2` on `R^d` with no nonsmooth part.
#[derive(Debug, Clone)]
pub struct Quadratic {
    set: FeasibleSet,
    start: Vec<f64>,
}

impl Quadratic {
    pub fn new(start: Vec<f64>) -> Self {
        Quadratic { set: FeasibleSet::FullSpace(start.len()), start }
    }
}

impl SmoothedOracle for Quadratic {
    fn dim(&self) -> usize {
        self.start.len()
    }

    fn params(&self) -> SmoothingParams {
        SmoothingParams { kappa: 0.0, k_const: 1.0, l_h: 0.0, mu_bar: 1.0 }
    }

    fn value(&self, x: &[f64], _mu: f64) -> f64 {
        0.5 * linalg::norm_sq(x)
    }

    fn grad_into(&self, x: &[f64], _mu: f64, out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn stoch_grad_into(&self, x: &[f64], mu: f64, _rng: &mut dyn RngCore, out: &mut [f64]) {
        self.grad_into(x, mu, out);
    }

    fn nonsmooth_value(&self, x: &[f64]) -> f64 {
        0.5 * linalg::norm_sq(x)
    }
}

impl Problem for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn initial_point(&self) -> Vec<f64> {
        self.start.clone()
    }

    fn subgrad_batch_into(&self, x: &[f64], m: usize, _rng: &mut dyn RngCore, out: &mut [f64]) -> u64 {
        out.copy_from_slice(x);
        m as u64
    }

    fn sample_count(&self) -> usize {
        1
    }

    fn fingerprint(&self) -> String {
        digest(&[b"quadratic", &f64_bytes(&self.start)])
    }
}

/// `max_xi <a_xi, x> + b_xi` over a feasible set, smoothed by log-sum-exp.
pub struct SyntheticMax {
    name: String,
    smoother: LogSumExpMaxSmoother<AffineFamily>,
    set: FeasibleSet,
    start: Vec<f64>,
}

impl SyntheticMax {
    pub fn new(
        name: impl Into<String>,
        family: AffineFamily,
        set: FeasibleSet,
        start: Vec<f64>,
        mu_bar: f64,
    ) -> Result<Self> {
        if set.dim() != family.dim() {
            return Err(crate::Error::DimensionMismatch { expected: family.dim(), got: set.dim() });
        }
        if start.len() != family.dim() {
            return Err(crate::Error::DimensionMismatch { expected: family.dim(), got: start.len() });
        }
        Ok(SyntheticMax {
            name: name.into(),
            smoother: LogSumExpMaxSmoother::new(family, mu_bar)?,
            set,
            start,
        })
    }

    /// `max(x1, x2, 0.3 - x1 - x2)` over the 2-simplex, started at `(1, 0)`.
    /// The optimum is 0.5 at `(0.5, 0.5)`.
    pub fn piecewise_linear_2d() -> Self {
        let fam = AffineFamily::new(2, vec![1.0, 0.0, 0.0, 1.0, -1.0, -1.0], vec![0.0, 0.0, 0.3])
            .expect("static family");
        Self::new("synthetic-max", fam, FeasibleSet::Simplex(2), vec![1.0, 0.0], 1.0).expect("static problem")
    }

    /// `q` random affine pieces with standard normal slopes over the
    /// `d`-simplex, started at the first vertex.
    pub fn random(q: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<f64> = (0..q * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let offsets: Vec<f64> = (0..q).map(|_| 0.1 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        let fam = AffineFamily::new(d, rows, offsets)?;
        let mut start = vec![0.0; d];
        start[0] = 1.0;
        Self::new(format!("synthetic-max-q{q}-d{d}"), fam, FeasibleSet::Simplex(d), start, 1.0)
    }

    pub fn smoother(&self) -> &LogSumExpMaxSmoother<AffineFamily> {
        &self.smoother
    }
}

impl SmoothedOracle for SyntheticMax {
    fn dim(&self) -> usize {
        self.smoother.dim()
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

impl Problem for SyntheticMax {
    fn name(&self) -> &str {
        &self.name
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn initial_point(&self) -> Vec<f64> {
        self.start.clone()
    }

    /// Gradient of the first maximizing piece; a full pass over all pieces.
    fn subgrad_batch_into(&self, x: &[f64], _m: usize, _rng: &mut dyn RngCore, out: &mut [f64]) -> u64 {
        let fam = self.smoother.family();
        let vals = self.smoother.component_values(x);
        let best = argmax(&vals);
        out.iter_mut().for_each(|o| *o = 0.0);
        fam.add_grad(best, x, 1.0, out);
        fam.count() as u64
    }

    fn sample_count(&self) -> usize {
        self.smoother.family().count()
    }

    fn fingerprint(&self) -> String {
        let fam = self.smoother.family();
        let rows: Vec<f64> = (0..fam.count()).flat_map(|i| fam.row(i).to_vec()).collect();
        let offs: Vec<f64> = (0..fam.count()).map(|i| fam.offset(i)).collect();
        digest(&[self.name.as_bytes(), &f64_bytes(&rows), &f64_bytes(&offs)])
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_linear_optimum_on_grid() {
        let p = SyntheticMax::piecewise_linear_2d();
        let mut best = f64::INFINITY;
        for i in 0..=10_000 {
            let t = i as f64 * 1e-4;
            best = best.min(p.objective(&[t, 1.0 - t]));
        }
        assert!((best - 0.5).abs() < 1e-12);
        assert_eq!(p.params().l_h, 2.0);
        assert!((p.params().kappa - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn subgradient_picks_first_max() {
        let p = SyntheticMax::piecewise_linear_2d();
        let mut g = vec![0.0; 2];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cost = p.subgrad_batch_into(&[0.5, 0.5], 4, &mut rng, &mut g);
        assert_eq!(g, vec![1.0, 0.0]);
        assert_eq!(cost, 3);
    }

    #[test]
    fn random_instance_is_reproducible() {
        let a = SyntheticMax::random(20, 3, 7).unwrap();
        let b = SyntheticMax::random(20, 3, 7).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), SyntheticMax::random(20, 3, 8).unwrap().fingerprint());
    }
}
