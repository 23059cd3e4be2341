use crate::error::{Error, Result};
use crate::precision::FloatFormat;

use super::PrecisionContext;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::LengthMismatch {
                expected: rows,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Binary64 product, for diagnostics and test oracles.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} minus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn rounded(&self, format: &FloatFormat) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: format.round_elementwise(&self.data),
        }
    }

    /// max |QᵀQ - I| over the columns of `self`, in binary64.
    pub fn orthogonality_loss(&self) -> f64 {
        let gram = self.transpose().matmul(self).expect("square gram");
        gram.sub(&Matrix::identity(self.cols)).expect("same shape").max_abs()
    }

    /// Solves (AᵀA + α²I) x = rhs by Cholesky under `ctx`. Reference path for
    /// the dense iterated Tikhonov step; sized for small matrices.
    pub fn solve_regularized_normal(&self, alpha: f64, rhs: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
        super::check_len(self.cols, rhs.len())?;
        let n = self.cols;
        let alpha2 = ctx.mul(alpha, alpha);
        let at = self.transpose();
        let mut normal = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut v = ctx.dot_unchecked(at.row(i), at.row(j));
                if i == j {
                    v = ctx.add(v, alpha2);
                }
                normal.set(i, j, v);
                normal.set(j, i, v);
            }
        }
        cholesky_solve(&normal, rhs, ctx)
    }
}

/// Solves S x = rhs for symmetric positive definite S under `ctx`.
pub(crate) fn cholesky_solve(s: &Matrix, rhs: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
    let n = s.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut acc = s.get(j, j);
        for k in 0..j {
            acc = ctx.accumulate(acc, -l.get(j, k), l.get(j, k));
        }
        let d = ctx.finish(acc);
        if !(d > 0.0) {
            return Err(Error::NonPositivePivot { index: j, pivot: d });
        }
        let ljj = ctx.sqrt(d);
        l.set(j, j, ljj);
        for i in j + 1..n {
            let mut acc = s.get(i, j);
            for k in 0..j {
                acc = ctx.accumulate(acc, -l.get(i, k), l.get(j, k));
            }
            l.set(i, j, ctx.div(ctx.finish(acc), ljj));
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut acc = rhs[i];
        for (k, &zk) in z.iter().enumerate().take(i) {
            acc = ctx.accumulate(acc, -l.get(i, k), zk);
        }
        z[i] = ctx.div(ctx.finish(acc), l.get(i, i));
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = z[i];
        for (k, &xk) in x.iter().enumerate().skip(i + 1) {
            acc = ctx.accumulate(acc, -l.get(k, i), xk);
        }
        x[i] = ctx.div(ctx.finish(acc), l.get(i, i));
    }
    Ok(x)
}
