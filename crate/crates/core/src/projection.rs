//! Euclidean projections onto the feasible sets used by the solvers.
//!
//! Matrix blocks ([`FeasibleSet::PsdCone`]) live in the flat iterate in
//! packed form (see [`crate::linalg::svec`]), so the Euclidean geometry of the
//! flat vector is the Frobenius geometry of the matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Default membership tolerance.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    FullSpace(usize),
    /// Probability simplex in `R^d`.
    Simplex(usize),
    /// `{(w, lambda) : |w| <= lambda}`; the argument is the total dimension
    /// `d + 1` with `lambda` stored last.
    SecondOrderCone(usize),
    /// PSD matrices of order `n`, packed to `n (n + 1) / 2` coordinates.
    PsdCone(usize),
    Ball { center: Vec<f64>, radius: f64 },
    Product(Vec<FeasibleSet>),
}

impl FeasibleSet {
    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::FullSpace(d) | FeasibleSet::Simplex(d) | FeasibleSet::SecondOrderCone(d) => *d,
            FeasibleSet::PsdCone(n) => linalg::svec_len(*n),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Product(sets) => sets.iter().map(FeasibleSet::dim).sum(),
        }
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = v.to_vec();
        self.project_in_place(&mut out)?;
        Ok(out)
    }

    pub fn project_in_place(&self, v: &mut [f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        match self {
            FeasibleSet::FullSpace(_) => {}
            FeasibleSet::Simplex(_) => {
                let p = project_simplex(v)?;
                v.copy_from_slice(&p);
            }
            FeasibleSet::SecondOrderCone(_) => {
                let (w, lam) = v.split_at_mut(v.len() - 1);
                let (pw, pl) = project_soc(w, lam[0]);
                w.copy_from_slice(&pw);
                lam[0] = pl;
            }
            FeasibleSet::PsdCone(n) => {
                let m = linalg::smat(v, *n);
                let p = project_psd(&m)?;
                v.copy_from_slice(&linalg::svec(&p));
            }
            FeasibleSet::Ball { center, radius } => {
                let p = project_ball(v, center, *radius);
                v.copy_from_slice(&p);
            }
            FeasibleSet::Product(sets) => {
                let mut off = 0;
                for s in sets {
                    let d = s.dim();
                    s.project_in_place(&mut v[off..off + d])?;
                    off += d;
                }
            }
        }
        Ok(())
    }

    /// Amount by which `v` violates membership (0 when feasible).
    pub fn violation(&self, v: &[f64]) -> f64 {
        if v.len() != self.dim() {
            return f64::INFINITY;
        }
        match self {
            FeasibleSet::FullSpace(_) => 0.0,
            FeasibleSet::Simplex(_) => {
                let neg = v.iter().fold(0.0f64, |a, x| a.max(-x));
                let sum: f64 = v.iter().sum();
                neg.max((sum - 1.0).abs())
            }
            FeasibleSet::SecondOrderCone(_) => {
                let (w, lam) = v.split_at(v.len() - 1);
                (linalg::norm(w) - lam[0]).max(0.0)
            }
            FeasibleSet::PsdCone(n) => {
                let m = linalg::smat(v, *n);
                let min = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
                if *n == 0 {
                    0.0
                } else {
                    (-min).max(0.0)
                }
            }
            FeasibleSet::Ball { center, radius } => (linalg::dist(v, center) - radius).max(0.0),
            FeasibleSet::Product(sets) => {
                let mut off = 0;
                let mut worst = 0.0f64;
                for s in sets {
                    let d = s.dim();
                    worst = worst.max(s.violation(&v[off..off + d]));
                    off += d;
                }
                worst
            }
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.violation(v) <= tol
    }
}

/// Projection onto the probability simplex by sorting and thresholding.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector onto the simplex"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite entry in simplex projection".into()));
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    Ok(v.iter().map(|x| (x - tau).max(0.0)).collect())
}

/// Projection onto the second-order cone `|w| <= lambda`.
pub fn project_soc(w: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let nw = linalg::norm(w);
    if nw <= lambda {
        (w.to_vec(), lambda)
    } else if nw <= -lambda {
        (vec![0.0; w.len()], 0.0)
    } else {
        let s = 0.5 * (lambda + nw);
        (w.iter().map(|x| s * x / nw).collect(), s)
    }
}

/// Projection onto the PSD cone: symmetrize, clip negative eigenvalues.
pub fn project_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid("PSD projection of a non-square matrix"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite entry in PSD projection".into()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|l| *l >= 0.0) {
        return Ok(sym);
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let p = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    Ok((&p + p.transpose()) * 0.5)
}

pub fn project_ball(v: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let d = linalg::dist(v, center);
    if d <= radius {
        return v.to_vec();
    }
    let s = radius / d;
    v.iter().zip(center).map(|(x, c)| c + s * (x - c)).collect()
}

/// Blockwise projection onto a product set.
pub fn project_product(sets: &[FeasibleSet], v: &[f64]) -> Result<Vec<f64>> {
    FeasibleSet::Product(sets.to_vec()).project(v)
}
