//! Test problems: the 1D Gaussian-blur spectrum problem and 2D zero-boundary
//! blurs with Kronecker-structured operators.

mod blur2d;
pub mod image;
pub mod kron;
pub mod psf;
pub mod rng;
mod spectra;

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::krylov::LinearOperator;
use crate::linalg::{Matrix, PrecisionContext};
use crate::precision::FloatFormat;

pub use blur2d::{defocus2d, gauss2d, Blur2dOptions, PsfKind};
pub use image::{encode_pgm, image_to_vec, parse_pgm, read_pgm, satellite_phantom, vec_to_image, write_pgm};
pub use kron::{kron_factors_from_psf, psf_rank, BandedToeplitz, KroneckerOperator, KroneckerTerm};
pub use psf::{defocus_psf, defocus_psf_size, gaussian_psf, gaussian_psf_size};
pub use rng::NoiseRng;
pub use spectra::{spectra_matrix, spectra_phantom, spectra_problem, SPECTRA_DEFAULT_N, SPECTRA_DEFAULT_RHO};

/// The forward operator of a test problem.
#[derive(Debug, Clone, PartialEq)]
pub enum BlurOperator {
    Dense(Matrix),
    Kronecker(KroneckerOperator),
}

impl BlurOperator {
    /// Copy with every stored coefficient rounded to `format`.
    pub fn rounded(&self, format: &FloatFormat) -> BlurOperator {
        match self {
            BlurOperator::Dense(m) => BlurOperator::Dense(m.rounded(format)),
            BlurOperator::Kronecker(k) => BlurOperator::Kronecker(k.rounded(format)),
        }
    }

    pub fn as_dense(&self) -> Option<&Matrix> {
        match self {
            BlurOperator::Dense(m) => Some(m),
            BlurOperator::Kronecker(_) => None,
        }
    }
}

impl LinearOperator for BlurOperator {
    fn nrows(&self) -> usize {
        match self {
            BlurOperator::Dense(m) => m.rows(),
            BlurOperator::Kronecker(k) => k.nrows(),
        }
    }

    fn ncols(&self) -> usize {
        match self {
            BlurOperator::Dense(m) => m.cols(),
            BlurOperator::Kronecker(k) => k.ncols(),
        }
    }

    fn apply(&self, x: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        match self {
            BlurOperator::Dense(m) => m.apply(x, ctx),
            BlurOperator::Kronecker(k) => k.apply(x, ctx),
        }
    }

    fn apply_transpose(&self, y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        match self {
            BlurOperator::Dense(m) => m.apply_transpose(y, ctx),
            BlurOperator::Kronecker(k) => k.apply_transpose(y, ctx),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestProblem {
    pub operator: BlurOperator,
    /// Noisy data b = b_true + e.
    pub b: Vec<f64>,
    pub b_true: Vec<f64>,
    pub x_true: Vec<f64>,
    pub noise: Vec<f64>,
    /// ‖e‖
    pub epsilon: f64,
    /// Noise level in percent.
    pub mu: f64,
    /// (rows, cols) for image problems; vectors are stored column by column.
    pub image_shape: Option<(usize, usize)>,
}

impl TestProblem {
    pub fn from_parts(operator: BlurOperator, x_true: Vec<f64>, mu: f64, seed: u64) -> Result<Self> {
        if x_true.len() != operator.ncols() {
            return Err(Error::LengthMismatch {
                expected: operator.ncols(),
                found: x_true.len(),
            });
        }
        let b_true = operator.apply(&x_true, &PrecisionContext::fp64())?;
        let noisy = add_noise(&b_true, mu, seed)?;
        Ok(TestProblem {
            operator,
            b: noisy.b,
            b_true,
            x_true,
            noise: noisy.e,
            epsilon: noisy.epsilon,
            mu,
            image_shape: None,
        })
    }

    /// Writes `b.csv`, `b_true.csv`, `x_true.csv` and, for dense operators, `A.csv`.
    pub fn export_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let column = |v: &[f64]| {
            let mut s = String::new();
            for x in v {
                let _ = writeln!(s, "{x:e}");
            }
            s
        };
        std::fs::write(dir.join("b.csv"), column(&self.b))?;
        std::fs::write(dir.join("b_true.csv"), column(&self.b_true))?;
        std::fs::write(dir.join("x_true.csv"), column(&self.x_true))?;
        if let BlurOperator::Dense(a) = &self.operator {
            let mut s = String::new();
            for i in 0..a.rows() {
                let row: Vec<String> = a.row(i).iter().map(|x| format!("{x:e}")).collect();
                let _ = writeln!(s, "{}", row.join(","));
            }
            std::fs::write(dir.join("A.csv"), s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyData {
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub epsilon: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Adds white Gaussian noise scaled so that ‖e‖ = (μ/100)·‖b_true‖.
pub fn add_noise(b_true: &[f64], mu: f64, seed: u64) -> Result<NoisyData> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("noise level must be nonnegative, got {mu}")));
    }
    let b_norm = norm(b_true);
    if mu == 0.0 || b_norm == 0.0 {
        return Ok(NoisyData {
            b: b_true.to_vec(),
            e: vec![0.0; b_true.len()],
            epsilon: 0.0,
        });
    }
    let e0 = NoiseRng::new(seed).normal_vec(b_true.len());
    let scale = mu / 100.0 * b_norm / norm(&e0);
    let e: Vec<f64> = e0.iter().map(|x| x * scale).collect();
    let b = b_true.iter().zip(&e).map(|(x, y)| x + y).collect();
    let epsilon = norm(&e);
    Ok(NoisyData { b, e, epsilon })
}

/// Relative reconstruction error ‖x − x_true‖/‖x_true‖ in binary64.
pub fn rre(x: &[f64], x_true: &[f64]) -> Result<f64> {
    if x.len() != x_true.len() {
        return Err(Error::LengthMismatch {
            expected: x_true.len(),
            found: x.len(),
        });
    }
    let denom = norm(x_true);
    if denom == 0.0 {
        return Err(Error::InvalidParameter("true solution is zero".into()));
    }
    let diff: f64 = x.iter().zip(x_true).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(diff.sqrt() / denom)
}
