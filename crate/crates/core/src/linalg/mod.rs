//! Dense kernels executed under a working [`FloatFormat`].
//!
//! All accumulations run left to right in a fixed order so results are
//! bit-reproducible. With [`Granularity::OpLevel`] every product and partial
//! sum is rounded; with [`Granularity::KernelLevel`] a kernel accumulates in
//! binary64 and rounds only the entries it returns.

mod bidiagonal;
mod matrix;
mod svd;

pub use bidiagonal::{regularized_normal_solve, BidiagonalMatrix};
pub use matrix::Matrix;
pub use svd::{jacobi_svd, jacobi_svd_dense, SmallSvd, SvdMode, JACOBI_MAX_SWEEPS};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::precision::FloatFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Granularity {
    #[default]
    OpLevel,
    KernelLevel,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "op" | "op-level" => Ok(Granularity::OpLevel),
            "kernel" | "kernel-level" => Ok(Granularity::KernelLevel),
            other => Err(Error::InvalidParameter(format!("unknown granularity `{other}`"))),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::OpLevel => "op",
            Granularity::KernelLevel => "kernel",
        })
    }
}

/// Working precision plus the granularity at which rounding is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PrecisionContext {
    pub format: FloatFormat,
    pub granularity: Granularity,
}

impl PrecisionContext {
    pub fn new(format: FloatFormat, granularity: Granularity) -> Self {
        PrecisionContext { format, granularity }
    }

    pub fn op_level(format: FloatFormat) -> Self {
        Self::new(format, Granularity::OpLevel)
    }

    pub fn kernel_level(format: FloatFormat) -> Self {
        Self::new(format, Granularity::KernelLevel)
    }

    pub fn fp64() -> Self {
        Self::op_level(FloatFormat::FP64)
    }

    pub fn unit_roundoff(&self) -> f64 {
        self.format.unit_roundoff()
    }

    #[inline]
    pub fn round(&self, x: f64) -> f64 {
        self.format.round(x)
    }

    #[inline]
    pub fn add(&self, a: f64, b: f64) -> f64 {
        self.round(a + b)
    }

    #[inline]
    pub fn sub(&self, a: f64, b: f64) -> f64 {
        self.round(a - b)
    }

    #[inline]
    pub fn mul(&self, a: f64, b: f64) -> f64 {
        self.round(a * b)
    }

    #[inline]
    pub fn div(&self, a: f64, b: f64) -> f64 {
        self.round(a / b)
    }

    #[inline]
    pub fn sqrt(&self, a: f64) -> f64 {
        self.round(a.sqrt())
    }

    /// `acc + a*b` as one step of an accumulation. Op-level rounds both the
    /// product and the sum; kernel-level leaves the result unrounded and the
    /// caller rounds the finished entry with [`Self::finish`].
    #[inline]
    pub fn accumulate(&self, acc: f64, a: f64, b: f64) -> f64 {
        match self.granularity {
            Granularity::OpLevel => self.round(acc + self.round(a * b)),
            Granularity::KernelLevel => acc + a * b,
        }
    }

    #[inline]
    pub fn finish(&self, acc: f64) -> f64 {
        match self.granularity {
            Granularity::OpLevel => acc,
            Granularity::KernelLevel => self.round(acc),
        }
    }

    pub fn dot(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(u.len(), v.len())?;
        Ok(self.dot_unchecked(u, v))
    }

    pub(crate) fn dot_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), v.len());
        if self.format.is_binary64() {
            return u.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b);
        }
        let acc = u
            .iter()
            .zip(v)
            .fold(0.0, |acc, (&a, &b)| self.accumulate(acc, a, b));
        self.finish(acc)
    }

    /// √(v·v) with the square root rounded.
    pub fn norm2(&self, v: &[f64]) -> f64 {
        self.sqrt(self.dot_unchecked(v, v))
    }

    /// y ← y + a·x
    pub fn axpy(&self, a: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), y.len());
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = self.finish(self.accumulate(*yi, a, xi));
        }
    }

    /// x ← a·x
    pub fn scale(&self, a: f64, x: &mut [f64]) {
        for xi in x.iter_mut() {
            *xi = self.mul(a, *xi);
        }
    }

    /// x ← x / a, rounding each quotient.
    pub fn scale_inv(&self, a: f64, x: &mut [f64]) {
        for xi in x.iter_mut() {
            *xi = self.div(*xi, a);
        }
    }

    /// a - b elementwise.
    pub fn sub_vec(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        check_len(a.len(), b.len())?;
        Ok(a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect())
    }

    /// A·x, each entry a row dot product.
    pub fn gemv(&self, a: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
        if a.cols() != x.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix times vector of length {}",
                a.rows(),
                a.cols(),
                x.len()
            )));
        }
        Ok((0..a.rows()).map(|i| self.dot_unchecked(a.row(i), x)).collect())
    }

    /// Aᵀ·y, accumulated column by column in increasing row order.
    pub fn gemv_t(&self, a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
        if a.rows() != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "transpose of {}x{} matrix times vector of length {}",
                a.rows(),
                a.cols(),
                y.len()
            )));
        }
        let mut out = vec![0.0; a.cols()];
        for (i, &yi) in y.iter().enumerate() {
            for (o, &aij) in out.iter_mut().zip(a.row(i)) {
                *o = self.accumulate(*o, aij, yi);
            }
        }
        for o in out.iter_mut() {
            *o = self.finish(*o);
        }
        Ok(out)
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}
