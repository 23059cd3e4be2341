//! Point spread functions, centered at `(size/2, size/2)` and normalized to
//! unit sum.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

fn normalized(mut m: Matrix) -> Matrix {
    let total: f64 = m.as_slice().iter().sum();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            m.set(i, j, m.get(i, j) / total);
        }
    }
    m
}

/// Separable Gaussian p(i,j) = g(i)·g(j); rank one by construction.
pub fn gaussian_psf(size: usize, spread: f64) -> Result<Matrix> {
    if size == 0 || !(spread > 0.0) {
        return Err(Error::InvalidParameter(format!("gaussian PSF needs size > 0 and spread > 0, got {size}, {spread}")));
    }
    let c = (size / 2) as f64;
    let g: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * spread * spread)).exp()
        })
        .collect();
    let sum: f64 = g.iter().sum();
    let g: Vec<f64> = g.iter().map(|x| x / sum).collect();
    Ok(Matrix::from_fn(size, size, |i, j| g[i] * g[j]))
}

/// Uniform disk of the given radius; a pixel is inside when its center is.
pub fn defocus_psf(size: usize, radius: f64) -> Result<Matrix> {
    if !(radius >= 1.0) {
        return Err(Error::InvalidParameter(format!("defocus radius must be at least 1, got {radius}")));
    }
    if radius > (size / 2) as f64 {
        return Err(Error::InvalidParameter(format!("defocus radius {radius} does not fit a {size}x{size} PSF")));
    }
    let c = (size / 2) as f64;
    let disk = Matrix::from_fn(size, size, |i, j| {
        let (di, dj) = (i as f64 - c, j as f64 - c);
        if di * di + dj * dj <= radius * radius {
            1.0
        } else {
            0.0
        }
    });
    Ok(normalized(disk))
}

/// Default odd PSF sizes for the two blur kinds.
pub fn gaussian_psf_size(spread: f64) -> usize {
    2 * (4.0 * spread).ceil() as usize + 1
}

pub fn defocus_psf_size(radius: f64) -> usize {
    2 * radius.ceil() as usize + 1
}
