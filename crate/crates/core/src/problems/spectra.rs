use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::{BlurOperator, TestProblem};

pub const SPECTRA_DEFAULT_N: usize = 64;
pub const SPECTRA_DEFAULT_RHO: f64 = 2.0;

// peak centers, heights and widths on a 64-point grid
const PEAKS: [(f64, f64, f64); 5] = [
    (10.0, 1.0, 1.5),
    (22.0, 0.45, 1.0),
    (33.0, 0.7, 2.5),
    (45.0, 0.3, 1.0),
    (55.0, 0.9, 2.0),
];

/// Symmetric Toeplitz Gaussian blur a_ij = exp(−(i−j)²/(2ρ²)) / (ρ√(2π)).
pub fn spectra_matrix(n: usize, rho: f64) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("spectra size must be at least 2, got {n}")));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("blur width must be positive, got {rho}")));
    }
    let c = 1.0 / (rho * (2.0 * PI).sqrt());
    Ok(Matrix::from_fn(n, n, |i, j| {
        let d = i as f64 - j as f64;
        c * (-d * d / (2.0 * rho * rho)).exp()
    }))
}

/// Five Gaussian peaks, positions and widths scaled by n/64.
pub fn spectra_phantom(n: usize) -> Vec<f64> {
    let s = n as f64 / 64.0;
    (0..n)
        .map(|i| {
            let t = i as f64;
            PEAKS
                .iter()
                .map(|&(c, h, w)| {
                    let (c, w) = (c * s, w * s);
                    h * (-(t - c) * (t - c) / (2.0 * w * w)).exp()
                })
                .sum()
        })
        .collect()
}

pub fn spectra_problem(n: usize, rho: f64, mu: f64, seed: u64) -> Result<TestProblem> {
    let a = spectra_matrix(n, rho)?;
    TestProblem::from_parts(BlurOperator::Dense(a), spectra_phantom(n), mu, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{jacobi_svd_dense, PrecisionContext, SvdMode};

    #[test]
    fn entries() {
        let a = spectra_matrix(64, 2.0).unwrap();
        assert!((a.get(5, 5) - 0.199_471_140_2).abs() < 1e-9);
        assert_eq!(a, a.transpose());
        assert_eq!(a.get(3, 7), a.get(10, 14));
    }

    #[test]
    fn first_column_via_gemv() {
        let a = spectra_matrix(3, 2.0).unwrap();
        let col = PrecisionContext::fp64().gemv(&a, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(col, a.column(0));
    }

    #[test]
    fn ill_conditioned_without_gap() {
        let a = spectra_matrix(64, 2.0).unwrap();
        let svd = jacobi_svd_dense(&a, &PrecisionContext::fp64(), SvdMode::WorkingPrecision).unwrap();
        assert!(svd.condition_number() >= 1e8, "{}", svd.condition_number());
        let s = &svd.singular_values;
        for j in 0..64 - 5 {
            assert!(s[j] / s[j + 1] < 10.0, "gap at {j}");
        }
    }

    #[test]
    fn phantom_is_nonnegative_with_peaks() {
        let x = spectra_phantom(64);
        assert!(x.iter().all(|&v| v >= 0.0));
        assert!((x[10] - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(spectra_matrix(1, 2.0).is_err());
        assert!(spectra_matrix(8, 0.0).is_err());
    }
}
