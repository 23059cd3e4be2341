//! Golub–Kahan bidiagonalization of an abstract operator.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{check_len, BidiagonalMatrix, Matrix, PrecisionContext};

/// A linear map available only through products with A and Aᵀ.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>>;
    fn apply_transpose(&self, y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>>;
}

impl LinearOperator for Matrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        ctx.gemv(self, x)
    }

    fn apply_transpose(&self, y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        ctx.gemv_t(self, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }

    fn ncols(&self) -> usize {
        (**self).ncols()
    }

    fn apply(&self, x: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        (**self).apply(x, ctx)
    }

    fn apply_transpose(&self, y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        (**self).apply_transpose(y, ctx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Reorthogonalization {
    None,
    #[default]
    Full,
}

impl Reorthogonalization {
    pub fn is_on(&self) -> bool {
        matches!(self, Reorthogonalization::Full)
    }
}

impl FromStr for Reorthogonalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "full" | "true" | "yes" => Ok(Reorthogonalization::Full),
            "off" | "none" | "false" | "no" => Ok(Reorthogonalization::None),
            other => Err(Error::InvalidParameter(format!("unknown reorthogonalization `{other}`"))),
        }
    }
}

impl fmt::Display for Reorthogonalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_on() { "on" } else { "off" })
    }
}

/// A V = U B with U holding p+1 columns and V holding p columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GkbFactorization {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub b: BidiagonalMatrix,
    /// Uᵀb
    pub b_tilde: Vec<f64>,
    /// Step during which a coefficient rounded to zero, if any.
    pub breakdown_step: Option<usize>,
}

impl GkbFactorization {
    pub fn p(&self) -> usize {
        self.b.cols()
    }

    /// The factorization after the first `q` steps.
    pub fn truncated(&self, q: usize) -> Result<GkbFactorization> {
        if q == 0 || q > self.p() {
            return Err(Error::StepsOutOfRange { p: q, max: self.p() });
        }
        Ok(GkbFactorization {
            u: self.u[..=q].to_vec(),
            v: self.v[..q].to_vec(),
            b: self.b.truncated(q),
            b_tilde: self.b_tilde[..=q].to_vec(),
            breakdown_step: self.breakdown_step.filter(|&s| s <= q),
        })
    }

    /// x = V y under `ctx`.
    pub fn project(&self, y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        check_len(self.p(), y.len())?;
        let n = self.v.first().map_or(0, Vec::len);
        let mut x = vec![0.0; n];
        for (vj, &yj) in self.v.iter().zip(y) {
            for (xi, &vji) in x.iter_mut().zip(vj) {
                *xi = ctx.accumulate(*xi, vji, yj);
            }
        }
        for xi in x.iter_mut() {
            *xi = ctx.finish(*xi);
        }
        Ok(x)
    }

    pub fn u_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.u).expect("equal column lengths")
    }

    pub fn v_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.v).expect("equal column lengths")
    }

    /// max |VᵀV − I| in binary64.
    pub fn v_orthogonality_loss(&self) -> f64 {
        gram_loss(&self.v)
    }

    pub fn u_orthogonality_loss(&self) -> f64 {
        gram_loss(&self.u)
    }

    /// ‖A V − U B‖_F evaluated in binary64.
    pub fn factorization_residual(&self, a: &dyn LinearOperator) -> Result<f64> {
        let ctx = PrecisionContext::fp64();
        let mut total = 0.0;
        for (j, vj) in self.v.iter().enumerate() {
            let mut col = a.apply(vj, &ctx)?;
            for (c, (&uj, &uj1)) in col.iter_mut().zip(self.u[j].iter().zip(&self.u[j + 1])) {
                *c -= self.b.diag[j] * uj + self.b.sub[j] * uj1;
            }
            total += col.iter().map(|x| x * x).sum::<f64>();
        }
        Ok(total.sqrt())
    }
}

fn gram_loss(cols: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..cols.len() {
        for j in 0..=i {
            let g: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Removes from `w` its components along every basis column, two passes of
/// classical Gram–Schmidt. The result is not normalized.
pub fn reorthogonalize(w: &[f64], basis: &[Vec<f64>], ctx: &PrecisionContext) -> Vec<f64> {
    let mut w = w.to_vec();
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|q| ctx.dot_unchecked(q, &w)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            ctx.axpy(-c, q, &mut w);
        }
    }
    w
}

/// Runs `p` steps of Golub–Kahan bidiagonalization started from `b`.
///
/// Stops early and records `breakdown_step` when a normalization coefficient
/// rounds to exactly zero in the working format.
pub fn gkb(
    a: &dyn LinearOperator,
    b: &[f64],
    p: usize,
    reorth: Reorthogonalization,
    ctx: &PrecisionContext,
) -> Result<GkbFactorization> {
    let (m, n) = (a.nrows(), a.ncols());
    check_len(m, b.len())?;
    let max = m.min(n);
    if p == 0 || p > max {
        return Err(Error::StepsOutOfRange { p, max });
    }
    let b = ctx.format.round_elementwise(b);
    let beta1 = finite(ctx.norm2(&b), "beta", 1)?;
    if beta1 == 0.0 {
        return Err(Error::ZeroRhs);
    }

    let mut u1 = b.clone();
    ctx.scale_inv(beta1, &mut u1);
    let mut us = vec![u1];

    let w = a.apply_transpose(&us[0], ctx)?;
    let mut alpha = finite(ctx.norm2(&w), "alpha", 1)?;
    if alpha == 0.0 {
        return Err(Error::GkbBreakdown);
    }
    let mut v1 = w;
    ctx.scale_inv(alpha, &mut v1);
    let mut vs = vec![v1];

    let mut diag = Vec::with_capacity(p);
    let mut sub = Vec::with_capacity(p);
    let mut breakdown_step = None;

    for i in 0..p {
        diag.push(alpha);
        let mut r = a.apply(&vs[i], ctx)?;
        ctx.axpy(-alpha, &us[i], &mut r);
        if reorth.is_on() {
            r = reorthogonalize(&r, &us, ctx);
        }
        let beta = finite(ctx.norm2(&r), "beta", i + 2)?;
        if beta == 0.0 {
            sub.push(0.0);
            breakdown_step = Some(i + 1);
            let filler = complement_vector(&us, m, ctx);
            us.push(filler);
            break;
        }
        ctx.scale_inv(beta, &mut r);
        us.push(r);
        sub.push(beta);

        if i + 1 == p {
            break;
        }
        let mut w = a.apply_transpose(&us[i + 1], ctx)?;
        ctx.axpy(-beta, &vs[i], &mut w);
        if reorth.is_on() {
            w = reorthogonalize(&w, &vs, ctx);
        }
        alpha = finite(ctx.norm2(&w), "alpha", i + 2)?;
        if alpha == 0.0 {
            breakdown_step = Some(i + 2);
            break;
        }
        ctx.scale_inv(alpha, &mut w);
        vs.push(w);
    }

    let b_tilde = us.iter().map(|u| ctx.dot_unchecked(u, &b)).collect();
    Ok(GkbFactorization {
        u: us,
        v: vs,
        b: BidiagonalMatrix { diag, sub },
        b_tilde,
        breakdown_step,
    })
}

fn finite(x: f64, name: &'static str, step: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite { quantity: name, step })
    }
}

/// A unit vector orthogonal to `basis`, drawn from the canonical basis.
fn complement_vector(basis: &[Vec<f64>], dim: usize, ctx: &PrecisionContext) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let w = reorthogonalize(&e, basis, ctx);
        let nrm = ctx.norm2(&w);
        if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
            let done = nrm > 0.5;
            best = Some((nrm, w));
            if done {
                break;
            }
        }
    }
    let (nrm, mut w) = best.expect("dim > 0");
    ctx.scale_inv(nrm, &mut w);
    w
}
