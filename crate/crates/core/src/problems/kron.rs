//! Sums of Kronecker products of banded Toeplitz factors.
//!
//! Images are vectorized column by column: pixel (i, j) of an `rows × cols`
//! image sits at index `i + j·rows`. A term `A_r ⊗ A_c` then acts as
//! `X ↦ A_c X A_rᵀ`, with `A_c` of size rows×rows and `A_r` of size cols×cols.

use log::warn;

use crate::error::{Error, Result};
use crate::krylov::LinearOperator;
use crate::linalg::{check_len, jacobi_svd_dense, Matrix, PrecisionContext, SvdMode};
use crate::precision::FloatFormat;

/// n×n Toeplitz matrix with `T[i][k] = coeffs[center + i − k]` when that
/// index is in range and zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedToeplitz {
    n: usize,
    coeffs: Vec<f64>,
    center: usize,
}

impl BandedToeplitz {
    pub fn new(n: usize, coeffs: Vec<f64>, center: usize) -> Result<Self> {
        if center >= coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "Toeplitz center {center} outside {} coefficients",
                coeffs.len()
            )));
        }
        Ok(BandedToeplitz { n, coeffs, center })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        let idx = self.center as isize + i as isize - k as isize;
        if idx >= 0 && (idx as usize) < self.coeffs.len() {
            self.coeffs[idx as usize]
        } else {
            0.0
        }
    }

    /// Range of k with a possibly nonzero `T[i][k]`.
    #[inline]
    fn band(&self, i: usize) -> std::ops::Range<usize> {
        let lo = (i + self.center + 1).saturating_sub(self.coeffs.len());
        let hi = (i + self.center + 1).min(self.n);
        lo..hi
    }

    pub fn transpose(&self) -> BandedToeplitz {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        BandedToeplitz {
            n: self.n,
            center: self.coeffs.len() - 1 - self.center,
            coeffs,
        }
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, k| self.entry(i, k))
    }

    fn rounded(&self, format: &FloatFormat) -> BandedToeplitz {
        BandedToeplitz {
            n: self.n,
            coeffs: format.round_elementwise(&self.coeffs),
            center: self.center,
        }
    }
}

/// One term `A_r ⊗ A_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerTerm {
    pub row_factor: BandedToeplitz,
    pub col_factor: BandedToeplitz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerOperator {
    terms: Vec<KroneckerTerm>,
    transposed: Vec<KroneckerTerm>,
    rows: usize,
    cols: usize,
}

impl KroneckerOperator {
    pub fn new(terms: Vec<KroneckerTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("Kronecker operator needs at least one term".into()))?;
        let (rows, cols) = (first.col_factor.size(), first.row_factor.size());
        if terms.iter().any(|t| t.col_factor.size() != rows || t.row_factor.size() != cols) {
            return Err(Error::ShapeMismatch("Kronecker terms disagree on image size".into()));
        }
        let transposed = terms
            .iter()
            .map(|t| KroneckerTerm {
                row_factor: t.row_factor.transpose(),
                col_factor: t.col_factor.transpose(),
            })
            .collect();
        Ok(KroneckerOperator {
            terms,
            transposed,
            rows,
            cols,
        })
    }

    pub fn terms(&self) -> &[KroneckerTerm] {
        &self.terms
    }

    /// Number of Kronecker terms K.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Image shape (rows, cols).
    pub fn image_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rounded(&self, format: &FloatFormat) -> KroneckerOperator {
        let round_terms = |terms: &[KroneckerTerm]| {
            terms
                .iter()
                .map(|t| KroneckerTerm {
                    row_factor: t.row_factor.rounded(format),
                    col_factor: t.col_factor.rounded(format),
                })
                .collect()
        };
        KroneckerOperator {
            terms: round_terms(&self.terms),
            transposed: round_terms(&self.transposed),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Explicit N×N matrix, N = rows·cols. Only sensible for small images.
    pub fn to_dense(&self) -> Matrix {
        let n = self.rows * self.cols;
        let mut out = Matrix::zeros(n, n);
        for t in &self.terms {
            let (r, c) = (t.row_factor.to_dense(), t.col_factor.to_dense());
            for j in 0..self.cols {
                for jj in 0..self.cols {
                    let rv = r.get(j, jj);
                    if rv == 0.0 {
                        continue;
                    }
                    for i in 0..self.rows {
                        for ii in 0..self.rows {
                            let idx = (i + j * self.rows, ii + jj * self.rows);
                            out.set(idx.0, idx.1, out.get(idx.0, idx.1) + rv * c.get(i, ii));
                        }
                    }
                }
            }
        }
        out
    }

    fn apply_terms(&self, terms: &[KroneckerTerm], x: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        let (rows, cols) = (self.rows, self.cols);
        check_len(rows * cols, x.len())?;
        let mut out = vec![0.0; rows * cols];
        let mut tmp = vec![0.0; rows * cols];
        let mut term_out = vec![0.0; rows * cols];
        for term in terms {
            // tmp = X A_rᵀ, column j of tmp accumulates columns jj of X
            for j in 0..cols {
                let dst = &mut tmp[j * rows..(j + 1) * rows];
                dst.iter_mut().for_each(|d| *d = 0.0);
                for jj in term.row_factor.band(j) {
                    let c = term.row_factor.entry(j, jj);
                    let src = &x[jj * rows..(jj + 1) * rows];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d = ctx.accumulate(*d, s, c);
                    }
                }
                for d in dst.iter_mut() {
                    *d = ctx.finish(*d);
                }
            }
            // term_out = A_c tmp, column by column
            for j in 0..cols {
                let src = &tmp[j * rows..(j + 1) * rows];
                let dst = &mut term_out[j * rows..(j + 1) * rows];
                for (i, d) in dst.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for ii in term.col_factor.band(i) {
                        acc = ctx.accumulate(acc, term.col_factor.entry(i, ii), src[ii]);
                    }
                    *d = ctx.finish(acc);
                }
            }
            for (o, &t) in out.iter_mut().zip(&term_out) {
                *o = ctx.accumulate(*o, t, 1.0);
            }
        }
        for o in out.iter_mut() {
            *o = ctx.finish(*o);
        }
        Ok(out)
    }
}

impl LinearOperator for KroneckerOperator {
    fn nrows(&self) -> usize {
        self.rows * self.cols
    }

    fn ncols(&self) -> usize {
        self.rows * self.cols
    }

    fn apply(&self, x: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        self.apply_terms(&self.terms, x, ctx)
    }

    fn apply_transpose(&self, y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        self.apply_terms(&self.transposed, y, ctx)
    }
}

/// Numerical rank of a PSF array: singular values above `size·ε·σ₁`.
pub fn psf_rank(psf: &Matrix) -> Result<usize> {
    let svd = jacobi_svd_dense(psf, &PrecisionContext::fp64(), SvdMode::WorkingPrecision)?;
    Ok(rank_of(&svd.singular_values, psf.rows().max(psf.cols())))
}

fn rank_of(sigma: &[f64], size: usize) -> usize {
    let top = sigma.first().copied().unwrap_or(0.0);
    let tol = size as f64 * f64::EPSILON * top;
    sigma.iter().filter(|&&s| s > tol).count()
}

/// Splits a square PSF into `k` Kronecker terms for zero-boundary 2D
/// convolution on an `image_rows × image_cols` image.
///
/// Each singular triplet (σ, u, v) of the PSF array becomes a term whose
/// column factor is built from √σ·u and row factor from √σ·v. With all
/// nonzero triplets the operator equals the zero-boundary convolution.
/// If `k` exceeds the numerical rank only the available terms are returned.
pub fn kron_factors_from_psf(psf: &Matrix, k: usize, image_rows: usize, image_cols: usize) -> Result<KroneckerOperator> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if psf.rows() != psf.cols() {
        return Err(Error::ShapeMismatch(format!("PSF must be square, got {}x{}", psf.rows(), psf.cols())));
    }
    let svd = jacobi_svd_dense(psf, &PrecisionContext::fp64(), SvdMode::WorkingPrecision)?;
    let rank = rank_of(&svd.singular_values, psf.rows());
    if rank == 0 {
        return Err(Error::InvalidParameter("PSF is identically zero".into()));
    }
    if k > rank {
        warn!("requested {k} Kronecker terms but the PSF has rank {rank}; using {rank}");
    }
    let center = psf.rows() / 2;
    let terms = (0..k.min(rank))
        .map(|t| {
            let scale = svd.singular_values[t].sqrt();
            let u: Vec<f64> = svd.left_vector(t).iter().map(|x| x * scale).collect();
            let v: Vec<f64> = svd.right_vector(t).iter().map(|x| x * scale).collect();
            Ok(KroneckerTerm {
                col_factor: BandedToeplitz::new(image_rows, u, center)?,
                row_factor: BandedToeplitz::new(image_cols, v, center)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    KroneckerOperator::new(terms)
}
