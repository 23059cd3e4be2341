//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use pit_core::linalg::{BidiagonalMatrix, Matrix};

/// Dense matrix of the zero-boundary convolution Y[i][j] =
/// Σ P[k][l] X[i + c − k][j + c − l] acting on column-major image vectors,
/// with c the PSF center.
pub fn dense_convolution(psf: &Matrix, rows: usize, cols: usize) -> Matrix {
    let n = rows * cols;
    let (cr, cc) = ((psf.rows() / 2) as isize, (psf.cols() / 2) as isize);
    let mut a = Matrix::zeros(n, n);
    for j in 0..cols as isize {
        for i in 0..rows as isize {
            for k in 0..psf.rows() as isize {
                for l in 0..psf.cols() as isize {
                    let (si, sj) = (i + cr - k, j + cc - l);
                    if si < 0 || sj < 0 || si >= rows as isize || sj >= cols as isize {
                        continue;
                    }
                    let row = (i + j * rows as isize) as usize;
                    let col = (si + sj * rows as isize) as usize;
                    a.set(row, col, a.get(row, col) + psf.get(k as usize, l as usize));
                }
            }
        }
    }
    a
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// zero diagonal and off-diagonal `e` (Sturm sequence count).
fn sturm_count(e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for &ei in e {
        let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = -x - ei * ei / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Singular values of a lower bidiagonal matrix in descending order, by
/// bisection on the eigenvalues of its zero-diagonal tridiagonal form
/// [α₁, β₁, α₂, β₂, …], whose spectrum is {±σᵢ} plus zeros.
pub fn bidiagonal_singular_values(b: &BidiagonalMatrix) -> Vec<f64> {
    let mut e = Vec::with_capacity(2 * b.cols());
    for (a, s) in b.diag.iter().zip(&b.sub) {
        e.push(*a);
        e.push(*s);
    }
    let dim = e.len() + 1;
    let bound = 2.0 * e.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0;
    (0..b.cols())
        .map(|i| {
            // the (dim − 1 − i)-th eigenvalue from the bottom is σ_(i+1)
            let target = dim - 1 - i;
            let (mut lo, mut hi) = (0.0, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if sturm_count(&e, mid) > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diagonal(sigma: &[f64]) -> Matrix {
    let n = sigma.len();
    Matrix::from_fn(n, n, |i, j| if i == j { sigma[i] } else { 0.0 })
}
