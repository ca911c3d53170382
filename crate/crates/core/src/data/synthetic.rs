//! Seeded synthetic datasets for desk-scale experiments.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{ReturnsTable, SparseDataset};
use crate::error::{Error, Result};

/// `n` points in the plane, separable through the origin with the given
/// margin along `(1, 1) / sqrt(2)`.
///
/// Points are drawn from `N(y (1, 1), 0.5^2 I)` with balanced random labels
/// and redrawn until `y <x, (1,1)> / sqrt(2) >= margin`.
pub fn separable_2d(n: usize, margin: f64, seed: u64) -> Result<SparseDataset> {
    if n == 0 || !(margin >= 0.0) || margin > 1.0 {
        return Err(Error::invalid(format!("separable_2d needs n >= 1 and margin in [0, 1], got {n}, {margin}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).expect("valid normal");
    let mut feats = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while feats.len() < n {
        let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let p = [y + noise.sample(&mut rng), y + noise.sample(&mut rng)];
        if y * (p[0] + p[1]) / std::f64::consts::SQRT_2 >= margin {
            feats.push(p.to_vec());
            labels.push(y);
        }
    }
    SparseDataset::from_dense(&feats, labels)
}

/// Gross daily returns (close / open ratios) for `d` assets over `q` days:
/// a shared market factor plus idiosyncratic noise, centered near 1.
pub fn gaussian_returns(q: usize, d: usize, seed: u64) -> Result<ReturnsTable> {
    if q < 2 || d == 0 {
        return Err(Error::invalid(format!("gaussian_returns needs q >= 2 and d >= 1, got {q}, {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(q * d);
    for _ in 0..q {
        let market: f64 = StandardNormal.sample(&mut rng);
        for j in 0..d {
            let drift = 1.0 + 0.0005 * (j + 1) as f64;
            let vol = 0.01 * (1.0 + j as f64 / d as f64);
            let own: f64 = StandardNormal.sample(&mut rng);
            data.push(drift + vol * (0.6 * market + 0.8 * own));
        }
    }
    Ok(ReturnsTable { dates: None, returns: DMatrix::from_row_slice(q, d, &data), dropped: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_has_margin() {
        let d = separable_2d(200, 0.2, 1).unwrap();
        assert_eq!(d.n_samples(), 200);
        for i in 0..200 {
            assert!(d.labels[i] * d.row_dot(i, &[1.0, 1.0]) / 2f64.sqrt() >= 0.2);
        }
        assert!(d.labels.iter().any(|y| *y > 0.0) && d.labels.iter().any(|y| *y < 0.0));
    }

    #[test]
    fn returns_near_one_and_reproducible() {
        let a = gaussian_returns(50, 3, 4).unwrap();
        assert_eq!(a.shape(), (50, 3));
        assert!(a.returns.iter().all(|v| (v - 1.0).abs() < 0.2));
        assert_eq!(a, gaussian_returns(50, 3, 4).unwrap());
    }
}
