use crate::error::Result;
use crate::linalg::Matrix;

use super::image::{image_to_vec, satellite_phantom};
use super::kron::kron_factors_from_psf;
use super::psf::{defocus_psf, defocus_psf_size, gaussian_psf, gaussian_psf_size};
use super::{BlurOperator, TestProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsfKind {
    Gaussian { spread: f64 },
    Defocus { radius: f64 },
}

impl PsfKind {
    pub fn psf(&self) -> Result<Matrix> {
        match *self {
            PsfKind::Gaussian { spread } => gaussian_psf(gaussian_psf_size(spread), spread),
            PsfKind::Defocus { radius } => defocus_psf(defocus_psf_size(radius), radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blur2dOptions {
    pub psf: PsfKind,
    /// Kronecker terms kept in the operator.
    pub terms: usize,
    /// True image; the 256×256 satellite phantom when absent.
    pub image: Option<Matrix>,
    pub mu: f64,
    pub seed: u64,
}

impl Blur2dOptions {
    pub fn gauss(mu: f64, seed: u64) -> Self {
        Blur2dOptions {
            psf: PsfKind::Gaussian { spread: 4.0 },
            terms: 1,
            image: None,
            mu,
            seed,
        }
    }

    pub fn defocus(mu: f64, seed: u64) -> Self {
        Blur2dOptions {
            psf: PsfKind::Defocus { radius: 7.0 },
            terms: 6,
            image: None,
            mu,
            seed,
        }
    }

    /// Builds the problem. The clean data come from the K-term operator
    /// itself, so the model is exact up to the added noise.
    pub fn build(&self) -> Result<TestProblem> {
        let image = self.image.clone().unwrap_or_else(|| satellite_phantom(256));
        let (rows, cols) = (image.rows(), image.cols());
        let op = kron_factors_from_psf(&self.psf.psf()?, self.terms, rows, cols)?;
        let mut problem = TestProblem::from_parts(BlurOperator::Kronecker(op), image_to_vec(&image), self.mu, self.seed)?;
        problem.image_shape = Some((rows, cols));
        Ok(problem)
    }
}

/// Gaussian blur (spread 4, one term) of `image` or the phantom.
pub fn gauss2d(image: Option<Matrix>, mu: f64, seed: u64) -> Result<TestProblem> {
    Blur2dOptions {
        image,
        ..Blur2dOptions::gauss(mu, seed)
    }
    .build()
}

/// Defocus blur (radius 7) with `terms` Kronecker terms.
pub fn defocus2d(image: Option<Matrix>, terms: usize, mu: f64, seed: u64) -> Result<TestProblem> {
    Blur2dOptions {
        image,
        terms,
        ..Blur2dOptions::defocus(mu, seed)
    }
    .build()
}
