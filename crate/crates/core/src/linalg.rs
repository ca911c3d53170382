//! Small dense helpers on slices plus the symmetric-matrix packing used to
//! embed matrix variables into flat iterates.

use nalgebra::DMatrix;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: f64, x: &mut [f64]) {
    for xi in x {
        *xi *= a;
    }
}

/// Length of the packed upper triangle of an `n x n` symmetric matrix.
pub const fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Recovers `n` from a packed length, if it is triangular.
pub fn svec_order(len: usize) -> Option<usize> {
    let n = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (svec_len(n) == len).then_some(n)
}

/// Packs the upper triangle row by row; off-diagonals are scaled by sqrt(2)
/// so that `dot(svec(A), svec(B)) == <A, B>_F`. The input is symmetrized.
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "svec of a non-square matrix");
    let mut out = Vec::with_capacity(svec_len(n));
    for i in 0..n {
        out.push(m[(i, i)]);
        for j in i + 1..n {
            out.push(std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), svec_len(n), "packed length does not match order");
    let mut m = DMatrix::zeros(n, n);
    let mut it = v.iter();
    for i in 0..n {
        m[(i, i)] = *it.next().unwrap();
        for j in i + 1..n {
            let x = it.next().unwrap() / std::f64::consts::SQRT_2;
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Squared spectral norm of a dense row-major `rows x cols` matrix.
pub fn spectral_norm_sq(data: &[f64], rows: usize, cols: usize) -> f64 {
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let a = DMatrix::from_row_slice(rows, cols, data);
    let gram = a.transpose() * &a;
    lambda_max(&gram).max(0.0)
}
