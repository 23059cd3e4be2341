use crate::error::{Error, Result};

use super::{check_len, Granularity, Matrix, PrecisionContext};

/// The (p+1)×p lower bidiagonal matrix produced by Golub–Kahan
/// bidiagonalization: `diag[i]` sits at (i, i) and `sub[i]` at (i+1, i).
#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalMatrix {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
}

impl BidiagonalMatrix {
    pub fn new(diag: Vec<f64>, sub: Vec<f64>) -> Result<Self> {
        check_len(diag.len(), sub.len())?;
        Ok(BidiagonalMatrix { diag, sub })
    }

    /// Number of columns p.
    pub fn cols(&self) -> usize {
        self.diag.len()
    }

    pub fn rows(&self) -> usize {
        self.diag.len() + 1
    }

    /// Leading q columns (and q+1 rows).
    pub fn truncated(&self, q: usize) -> BidiagonalMatrix {
        BidiagonalMatrix {
            diag: self.diag[..q].to_vec(),
            sub: self.sub[..q].to_vec(),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows(), self.cols());
        for i in 0..self.cols() {
            m.set(i, i, self.diag[i]);
            m.set(i + 1, i, self.sub[i]);
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.sub)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// B·y, length p+1.
    pub fn apply(&self, y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        let p = self.cols();
        check_len(p, y.len())?;
        let mut out = Vec::with_capacity(p + 1);
        out.push(ctx.mul(self.diag[0], y[0]));
        for i in 1..p {
            let acc = ctx.accumulate(0.0, self.sub[i - 1], y[i - 1]);
            out.push(ctx.finish(ctx.accumulate(acc, self.diag[i], y[i])));
        }
        out.push(ctx.mul(self.sub[p - 1], y[p - 1]));
        Ok(out)
    }

    /// Bᵀ·r, length p.
    pub fn apply_transpose(&self, r: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        let p = self.cols();
        check_len(p + 1, r.len())?;
        Ok((0..p)
            .map(|i| {
                let acc = ctx.accumulate(0.0, self.diag[i], r[i]);
                ctx.finish(ctx.accumulate(acc, self.sub[i], r[i + 1]))
            })
            .collect())
    }

    /// b − B·y, the projected residual.
    pub fn residual(&self, b: &[f64], y: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        check_len(self.rows(), b.len())?;
        let by = self.apply(y, ctx)?;
        ctx.sub_vec(b, &by)
    }
}

/// Solves (BᵀB + α²I) h = rhs through an LDLᵀ factorization of the
/// tridiagonal matrix BᵀB + α²I.
///
/// The tridiagonal entries are formed under `ctx`. At op-level every step of
/// the factorization and both substitutions is rounded; at kernel-level the
/// factorization runs in binary64 and only `h` is rounded.
pub fn regularized_normal_solve(
    b: &BidiagonalMatrix,
    alpha: f64,
    rhs: &[f64],
    ctx: &PrecisionContext,
) -> Result<Vec<f64>> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    let p = b.cols();
    check_len(p, rhs.len())?;
    if p == 0 {
        return Ok(Vec::new());
    }

    let alpha2 = ctx.mul(alpha, alpha);
    // diagonal d_i² + s_i² + α², off-diagonal s_i·d_{i+1}
    let diag: Vec<f64> = (0..p)
        .map(|i| {
            let acc = ctx.accumulate(0.0, b.diag[i], b.diag[i]);
            let acc = ctx.accumulate(acc, b.sub[i], b.sub[i]);
            ctx.add(ctx.finish(acc), alpha2)
        })
        .collect();
    let off: Vec<f64> = (0..p - 1).map(|i| ctx.mul(b.sub[i], b.diag[i + 1])).collect();

    let inner = match ctx.granularity {
        Granularity::OpLevel => *ctx,
        Granularity::KernelLevel => PrecisionContext::fp64(),
    };
    let h = ldlt_tridiagonal_solve(&diag, &off, rhs, &inner)?;
    Ok(ctx.format.round_elementwise(&h))
}

fn ldlt_tridiagonal_solve(diag: &[f64], off: &[f64], rhs: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
    let p = diag.len();
    let mut d = Vec::with_capacity(p);
    let mut l = Vec::with_capacity(p.saturating_sub(1));
    d.push(diag[0]);
    for i in 0..p - 1 {
        if !(d[i] > 0.0) {
            return Err(Error::NonPositivePivot { index: i, pivot: d[i] });
        }
        let li = ctx.div(off[i], d[i]);
        l.push(li);
        d.push(ctx.sub(diag[i + 1], ctx.mul(li, off[i])));
    }
    if !(d[p - 1] > 0.0) {
        return Err(Error::NonPositivePivot {
            index: p - 1,
            pivot: d[p - 1],
        });
    }

    let mut z = Vec::with_capacity(p);
    z.push(rhs[0]);
    for i in 1..p {
        z.push(ctx.sub(rhs[i], ctx.mul(l[i - 1], z[i - 1])));
    }
    let mut h = vec![0.0; p];
    h[p - 1] = ctx.div(z[p - 1], d[p - 1]);
    for i in (0..p - 1).rev() {
        h[i] = ctx.sub(ctx.div(z[i], d[i]), ctx.mul(l[i], h[i + 1]));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::FloatFormat;
    use proptest::prelude::*;

    fn random_bidiagonal(p: usize, seed: u64) -> BidiagonalMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.1 + ((s >> 11) as f64) / (1u64 << 53) as f64
        };
        let diag = (0..p).map(|_| next()).collect();
        let sub = (0..p).map(|_| next()).collect();
        BidiagonalMatrix { diag, sub }
    }

    #[test]
    fn identity_embedded_example() {
        let b = BidiagonalMatrix::new(vec![1.0; 3], vec![0.0; 3]).unwrap();
        let h = regularized_normal_solve(&b, 1.0, &[1.0, 0.0, 0.0], &PrecisionContext::fp64()).unwrap();
        assert_eq!(h, vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn unregularized_solution_is_stationary() {
        let ctx = PrecisionContext::fp64();
        let b = random_bidiagonal(6, 11);
        let rhs_vec: Vec<f64> = (0..7).map(|i| (i as f64 * 0.7).sin()).collect();
        let rhs = b.apply_transpose(&rhs_vec, &ctx).unwrap();
        let h = regularized_normal_solve(&b, 0.0, &rhs, &ctx).unwrap();
        let r = b.residual(&rhs_vec, &h, &ctx).unwrap();
        let grad = b.apply_transpose(&r, &ctx).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-12), "{grad:?}");
    }

    #[test]
    fn matches_dense_solve() {
        // oracle: Gaussian elimination on the dense 4x4 normal matrix in binary64
        let b = random_bidiagonal(4, 5);
        let alpha: f64 = 0.3;
        let rhs = [0.2, -1.0, 0.5, 0.9];
        let dense = b.to_dense();
        let mut n = dense.transpose().matmul(&dense).unwrap();
        for i in 0..4 {
            n.set(i, i, n.get(i, i) + alpha * alpha);
        }
        let mut aug: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                let mut row = n.row(i).to_vec();
                row.push(rhs[i]);
                row
            })
            .collect();
        for c in 0..4 {
            let piv = (c..4).max_by(|&i, &j| aug[i][c].abs().total_cmp(&aug[j][c].abs())).unwrap();
            aug.swap(c, piv);
            let pivot = aug[c].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != c {
                    let f = row[c] / pivot[c];
                    for (a, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                        *a -= f * p;
                    }
                }
            }
        }
        let oracle: Vec<f64> = (0..4).map(|i| aug[i][4] / aug[i][i]).collect();
        let h = regularized_normal_solve(&b, alpha, &rhs, &PrecisionContext::fp64()).unwrap();
        for (g, e) in h.iter().zip(&oracle) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn rejects_negative_alpha() {
        let b = random_bidiagonal(2, 1);
        assert!(regularized_normal_solve(&b, -1.0, &[1.0, 1.0], &PrecisionContext::fp64()).is_err());
    }

    #[test]
    fn singular_unregularized_reports_pivot() {
        let b = BidiagonalMatrix::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let err = regularized_normal_solve(&b, 0.0, &[1.0, 1.0], &PrecisionContext::fp64()).unwrap_err();
        assert!(matches!(err, Error::NonPositivePivot { index: 1, .. }));
    }

    #[test]
    fn apply_and_transpose_match_dense() {
        let ctx = PrecisionContext::fp64();
        let b = random_bidiagonal(5, 2);
        let dense = b.to_dense();
        let y = [1.0, -2.0, 0.5, 0.25, 3.0];
        assert_eq!(b.apply(&y, &ctx).unwrap(), ctx.gemv(&dense, &y).unwrap());
        let r = [1.0, 0.0, -1.0, 2.0, 0.5, 0.1];
        let bt = b.apply_transpose(&r, &ctx).unwrap();
        let dt = ctx.gemv_t(&dense, &r).unwrap();
        for (a, c) in bt.iter().zip(&dt) {
            assert!((a - c).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn positive_alpha_always_factors(
            p in 1usize..30,
            seed in any::<u64>(),
            alpha in 1e-3f64..10.0,
            zero_every in 1usize..5,
        ) {
            let mut b = random_bidiagonal(p, seed);
            for i in (0..p).step_by(zero_every) {
                b.diag[i] = 0.0;
            }
            let rhs = vec![1.0; p];
            for ctx in [PrecisionContext::fp64(), PrecisionContext::op_level(FloatFormat::FP32)] {
                prop_assert!(regularized_normal_solve(&b, alpha, &rhs, &ctx).is_ok());
            }
        }
    }
}
