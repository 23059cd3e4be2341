//! Grayscale images: portable graymap I/O, column-major vectorization and a
//! synthetic satellite phantom.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Stacks the columns of `img` into one vector.
pub fn image_to_vec(img: &Matrix) -> Vec<f64> {
    let (rows, cols) = (img.rows(), img.cols());
    let mut v = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            v.push(img.get(i, j));
        }
    }
    v
}

pub fn vec_to_image(v: &[f64], rows: usize, cols: usize) -> Result<Matrix> {
    if v.len() != rows * cols {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            found: v.len(),
        });
    }
    Ok(Matrix::from_fn(rows, cols, |i, j| v[i + j * rows]))
}

/// Reads a P2 or P5 graymap with values scaled to [0, 1].
pub fn read_pgm(path: &Path) -> Result<Matrix> {
    let bytes = std::fs::read(path)?;
    parse_pgm(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Matrix> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Image("unexpected end of graymap header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let number = |s: String| -> Result<usize> { s.parse().map_err(|_| Error::Image(format!("bad graymap number {s:?}"))) };

    let magic = token()?;
    let cols = number(token()?)?;
    let rows = number(token()?)?;
    let maxval = number(token()?)?;
    if cols == 0 || rows == 0 || maxval == 0 || maxval > 65535 {
        return Err(Error::Image(format!("invalid graymap header {cols}x{rows} max {maxval}")));
    }
    let count = rows * cols;
    let raw: Vec<usize> = match magic.as_str() {
        "P2" => (0..count).map(|_| token().and_then(number)).collect::<Result<_>>()?,
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            let width = if maxval < 256 { 1 } else { 2 };
            let end = start + count * width;
            if end > bytes.len() {
                return Err(Error::Image("truncated graymap raster".into()));
            }
            bytes[start..end]
                .chunks(width)
                .map(|c| if width == 1 { c[0] as usize } else { (c[0] as usize) << 8 | c[1] as usize })
                .collect()
        }
        other => return Err(Error::Image(format!("unsupported graymap magic {other:?}"))),
    };
    if raw.iter().any(|&v| v > maxval) {
        return Err(Error::Image("pixel exceeds graymap maximum".into()));
    }
    let m = maxval as f64;
    Ok(Matrix::from_fn(rows, cols, |i, j| raw[i * cols + j] as f64 / m))
}

/// Binary 8-bit graymap; values are clamped to [0, 1].
pub fn encode_pgm(img: &Matrix) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    for i in 0..img.rows() {
        for &v in img.row(i) {
            out.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

pub fn write_pgm(path: &Path, img: &Matrix) -> Result<()> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}

fn in_rotated_rect(x: f64, y: f64, cx: f64, cy: f64, half_w: f64, half_h: f64, angle: f64) -> bool {
    let (s, c) = angle.sin_cos();
    let (dx, dy) = (x - cx, y - cy);
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() <= half_w && v.abs() <= half_h
}

/// Satellite-like test image on an n×n grid: a bright body, two ribbed solar
/// panels, a dish and an antenna on a black background.
pub fn satellite_phantom(n: usize) -> Matrix {
    let tilt: f64 = 0.35;
    Matrix::from_fn(n, n, |i, j| {
        // unit-square coordinates of the pixel center
        let y = (i as f64 + 0.5) / n as f64;
        let x = (j as f64 + 0.5) / n as f64;
        let (s, c) = tilt.sin_cos();
        let (dx, dy) = (x - 0.5, y - 0.5);
        let along = c * dx + s * dy;
        let across = -s * dx + c * dy;

        let mut v: f64 = 0.0;
        if in_rotated_rect(x, y, 0.5, 0.5, 0.42, 0.07, tilt) && along.abs() > 0.12 {
            // panels with dark ribs every 0.05 units
            let rib = ((along.abs() - 0.12) / 0.05).fract() < 0.15;
            v = if rib { 0.25 } else { 0.55 };
        }
        if in_rotated_rect(x, y, 0.5, 0.5, 0.10, 0.13, tilt) {
            v = 0.85;
        }
        if in_rotated_rect(x, y, 0.5, 0.5, 0.04, 0.05, tilt) {
            v = 1.0;
        }
        let (ex, ey) = (along, across + 0.19);
        if ex * ex / (0.07 * 0.07) + ey * ey / (0.035 * 0.035) <= 1.0 {
            v = 0.7;
        }
        if along.abs() <= 0.006 && across > 0.13 && across < 0.3 {
            v = 0.9;
        }
        v
    })
}
