//! One-sided (Hestenes) Jacobi SVD for the small projected matrices.

use crate::error::{Error, Result};

use super::{BidiagonalMatrix, Granularity, Matrix, PrecisionContext};

pub const JACOBI_MAX_SWEEPS: usize = 30;

/// Convergence threshold on |g_iᵀg_j| / (‖g_i‖‖g_j‖), in units of u.
const OFF_DIAGONAL_TOL_UNITS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdMode {
    /// Every rotation is computed in the context's format.
    #[default]
    WorkingPrecision,
    /// Computed in binary64 and the factors rounded afterwards.
    Binary64ThenRound,
}

/// A = Û Σ̂ V̂ᵀ for an m×n matrix with m ≥ n. `left_vectors` is the full
/// m×m orthogonal factor; its trailing m−n columns complete the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallSvd {
    pub left_vectors: Matrix,
    pub singular_values: Vec<f64>,
    pub right_vectors: Matrix,
}

impl SmallSvd {
    pub fn left_vector(&self, j: usize) -> Vec<f64> {
        self.left_vectors.column(j)
    }

    pub fn right_vector(&self, j: usize) -> Vec<f64> {
        self.right_vectors.column(j)
    }

    /// Û Σ̂ V̂ᵀ in binary64.
    pub fn reconstruct(&self) -> Matrix {
        let m = self.left_vectors.rows();
        let n = self.right_vectors.rows();
        let mut out = Matrix::zeros(m, n);
        for (k, &s) in self.singular_values.iter().enumerate() {
            for i in 0..m {
                let us = self.left_vectors.get(i, k) * s;
                for j in 0..n {
                    out.set(i, j, out.get(i, j) + us * self.right_vectors.get(j, k));
                }
            }
        }
        out
    }

    pub fn condition_number(&self) -> f64 {
        let first = self.singular_values.first().copied().unwrap_or(0.0);
        let last = self.singular_values.last().copied().unwrap_or(0.0);
        first / last
    }
}

pub fn jacobi_svd(b: &BidiagonalMatrix, ctx: &PrecisionContext) -> Result<SmallSvd> {
    jacobi_svd_dense(&b.to_dense(), ctx, SvdMode::WorkingPrecision)
}

pub fn jacobi_svd_dense(a: &Matrix, ctx: &PrecisionContext, mode: SvdMode) -> Result<SmallSvd> {
    match mode {
        SvdMode::WorkingPrecision => hestenes(a, ctx),
        SvdMode::Binary64ThenRound => {
            let svd = hestenes(a, &PrecisionContext::fp64())?;
            let f = ctx.format;
            Ok(SmallSvd {
                left_vectors: svd.left_vectors.rounded(&f),
                singular_values: f.round_elementwise(&svd.singular_values),
                right_vectors: svd.right_vectors.rounded(&f),
            })
        }
    }
}

fn hestenes(a: &Matrix, ctx: &PrecisionContext) -> Result<SmallSvd> {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return Err(Error::InvalidParameter("SVD of a matrix with no columns".into()));
    }
    if m < n {
        return Err(Error::ShapeMismatch(format!("Jacobi SVD needs rows >= cols, got {m}x{n}")));
    }
    let mut g: Vec<Vec<f64>> = a.rounded(&ctx.format).columns();
    let mut v: Vec<Vec<f64>> = Matrix::identity(n).columns();
    let tol = OFF_DIAGONAL_TOL_UNITS * ctx.unit_roundoff();

    let mut converged = false;
    let mut worst = 0.0f64;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = ctx.dot_unchecked(&g[i], &g[i]);
                let beta = ctx.dot_unchecked(&g[j], &g[j]);
                let gamma = ctx.dot_unchecked(&g[i], &g[j]);
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let ratio = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                if ratio <= tol {
                    continue;
                }
                worst = worst.max(ratio);
                let Some((c, s)) = rotation(alpha, beta, gamma, ctx) else {
                    continue;
                };
                rotate(&mut g, i, j, c, s, ctx);
                rotate(&mut v, i, j, c, s, ctx);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNotConverged {
            sweeps: JACOBI_MAX_SWEEPS,
            off_diagonal: worst,
        });
    }

    let sigma: Vec<f64> = g.iter().map(|col| ctx.norm2(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));

    let mut left: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut singular_values = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for &k in &order {
        singular_values.push(sigma[k]);
        right.push(v[k].clone());
        if sigma[k] > 0.0 {
            let mut u = g[k].clone();
            ctx.scale_inv(sigma[k], &mut u);
            left.push(u);
        }
    }
    complete_basis(&mut left, m, ctx);
    // zero singular values have their left vectors drawn from the completion,
    // which is already appended after the nonzero ones in sorted order
    Ok(SmallSvd {
        left_vectors: Matrix::from_columns(&left)?,
        singular_values,
        right_vectors: Matrix::from_columns(&right)?,
    })
}

/// Cosine and sine zeroing the (i, j) Gram entry.
fn rotation(alpha: f64, beta: f64, gamma: f64, ctx: &PrecisionContext) -> Option<(f64, f64)> {
    let zeta = ctx.div(ctx.sub(beta, alpha), ctx.mul(2.0, gamma));
    let zeta2 = ctx.mul(zeta, zeta);
    let mut t = if zeta2.is_finite() {
        let denom = ctx.add(zeta.abs(), ctx.sqrt(ctx.add(1.0, zeta2)));
        ctx.div(1.0, denom).copysign(zeta)
    } else {
        0.0
    };
    if t == 0.0 || !t.is_finite() {
        // |ζ| so large that ζ² overflows the format
        t = ctx.div(0.5, zeta);
    }
    if t == 0.0 || !t.is_finite() {
        return None;
    }
    let c = ctx.div(1.0, ctx.sqrt(ctx.add(1.0, ctx.mul(t, t))));
    let s = ctx.mul(c, t);
    Some((c, s))
}

/// Applies the rotation in the form x − s(y + τx), y + s(x − τy) with
/// τ = s/(1 + c), which keeps small rotations close to the identity.
fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64, ctx: &PrecisionContext) {
    let tau = ctx.div(s, ctx.add(1.0, c));
    let (left, right) = cols.split_at_mut(j);
    let (gi, gj) = (&mut left[i], &mut right[0]);
    match ctx.granularity {
        Granularity::OpLevel => {
            for (x, y) in gi.iter_mut().zip(gj.iter_mut()) {
                let xi = ctx.sub(*x, ctx.mul(s, ctx.add(*y, ctx.mul(tau, *x))));
                let yj = ctx.add(*y, ctx.mul(s, ctx.sub(*x, ctx.mul(tau, *y))));
                *x = xi;
                *y = yj;
            }
        }
        Granularity::KernelLevel => {
            for (x, y) in gi.iter_mut().zip(gj.iter_mut()) {
                let xi = ctx.round(*x - s * (*y + tau * *x));
                let yj = ctx.round(*y + s * (*x - tau * *y));
                *x = xi;
                *y = yj;
            }
        }
    }
}

/// Extends an orthonormal set to `dim` vectors by orthogonalizing the
/// canonical basis vector with the largest remaining component.
pub(crate) fn complete_basis(basis: &mut Vec<Vec<f64>>, dim: usize, ctx: &PrecisionContext) {
    while basis.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 0..dim {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            let w = crate::krylov::reorthogonalize(&e, basis, ctx);
            let nrm = ctx.norm2(&w);
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, w));
            }
        }
        let (nrm, mut w) = best.expect("dim > 0");
        ctx.scale_inv(nrm, &mut w);
        basis.push(w);
    }
}
