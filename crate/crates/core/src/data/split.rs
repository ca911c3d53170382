use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SparseDataset;
use crate::error::{Error, Result};

/// Seeded shuffle, then the first `round(fraction * n)` samples train.
pub fn split_train_test(data: &SparseDataset, fraction: f64, seed: u64) -> Result<(SparseDataset, SparseDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction must lie in (0, 1), got {fraction}")));
    }
    let n = data.n_samples();
    let n_train = (fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Data(format!("split of {n} samples at {fraction} leaves an empty side")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((data.subset(&idx[..n_train]), data.subset(&idx[n_train..])))
}
