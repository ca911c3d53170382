//! Problem instances: a smoothed objective oracle plus its feasible set and
//! the data needed to evaluate the true objective.

mod drpo;
mod drsvm;
mod synthetic;

pub use drpo::{estimate_moments, DrpoInstance, DrpoOptions, DrpoPoint};
pub use drsvm::{drsvm_accuracy, DrsvmInstance, DrsvmOptions};
pub use synthetic::{Quadratic, SyntheticMax};

use rand::RngCore;

use crate::projection::FeasibleSet;
use crate::smoothing::SmoothedOracle;

/// A composite problem `min_{x in X} f(x) + h(x)` together with a
/// smoothing of `h`.
///
/// The [`SmoothedOracle`] half describes `f + h~_mu`; its parameters fold
/// the gradient Lipschitz constant of `f` into `k_const`, and
/// `nonsmooth_value` is the true objective `f + h`.
pub trait Problem: SmoothedOracle {
    /// Short identifier used to label run records.
    fn name(&self) -> &str;

    fn feasible_set(&self) -> &FeasibleSet;

    fn initial_point(&self) -> Vec<f64>;

    fn objective(&self, x: &[f64]) -> f64 {
        self.nonsmooth_value(x)
    }

    /// Writes a mini-batch stochastic subgradient of the true objective into
    /// `out` and returns the number of oracle calls it cost.
    fn subgrad_batch_into(&self, x: &[f64], m: usize, rng: &mut dyn RngCore, out: &mut [f64]) -> u64;

    /// Classification accuracy, for problems that have one.
    fn accuracy(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Number of underlying samples (drives default estimation budgets).
    fn sample_count(&self) -> usize;

    /// Stable digest of the data and parameters, used to key caches.
    fn fingerprint(&self) -> String;
}

pub(crate) fn digest(parts: &[&[u8]]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn f64_bytes(v: &[f64]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}
