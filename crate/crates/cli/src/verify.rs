//! Built-in oracle checks run by `pit verify`.

use pit_core::filters::{
    effective_filters, filtered_synthesis, landweber_filters, nonstationary_pit_filters, stationary_pit_filters,
};
use pit_core::krylov::{gkb, LinearOperator, Reorthogonalization};
use pit_core::linalg::{jacobi_svd, Matrix, PrecisionContext, SmallSvd};
use pit_core::precision::{round_scalar, FloatFormat};
use pit_core::problems::{defocus_psf, kron_factors_from_psf, psf_rank, spectra_problem, NoiseRng};
use pit_core::solvers::{factorize, landweber_step, pit_solve_with_factorization, PitConfig};

type FallibleCheck = fn() -> pit_core::Result<Check>;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Decodes a binary16 bit pattern from its fields.
fn decode_half(bits: u16) -> f64 {
    let sign = if bits >> 15 == 1 { -1.0 } else { 1.0 };
    let exponent = ((bits >> 10) & 0x1F) as i32;
    let fraction = (bits & 0x3FF) as f64;
    match exponent {
        0 => sign * fraction * 2f64.powi(-24),
        31 if fraction == 0.0 => sign * f64::INFINITY,
        31 => f64::NAN,
        e => sign * (1.0 + fraction / 1024.0) * 2f64.powi(e - 15),
    }
}

fn rounding() -> Check {
    let f = FloatFormat::FP16;
    let mut mismatches = 0;
    for bits in 0..=u16::MAX {
        let x = decode_half(bits);
        let r = round_scalar(x, &f);
        if !(x.is_nan() && r.is_nan()) && r.to_bits() != x.to_bits() {
            mismatches += 1;
        }
    }
    for bits in 0u16..0x7BFF {
        let (lo, hi) = (decode_half(bits), decode_half(bits + 1));
        let even = if bits % 2 == 0 { lo } else { hi };
        if round_scalar(0.5 * (lo + hi), &f) != even {
            mismatches += 1;
        }
    }
    let single = FloatFormat::FP32;
    let mut rng = NoiseRng::new(7);
    for _ in 0..200_000 {
        let bits = rng.next_u64();
        let exponent = 1023 - 160 + (bits >> 52) % 300;
        let x = f64::from_bits((bits & (1 << 63)) | exponent << 52 | (bits & ((1 << 52) - 1)));
        if round_scalar(x, &single).to_bits() != (x as f32 as f64).to_bits() {
            mismatches += 1;
        }
    }
    Check {
        name: "rounding oracle",
        pass: mismatches == 0,
        detail: format!("{mismatches} mismatches over all binary16 patterns, ties and 2e5 binary32 samples"),
    }
}

fn fixed_alpha() -> Check {
    let ctx = PrecisionContext::fp64();
    let mut rng = NoiseRng::new(11);
    let mut worst: f64 = 0.0;
    for p in [1, 10, 40] {
        let sigma: Vec<f64> = (0..p).map(|_| rng.uniform().max(1e-6)).collect();
        for alpha in [0.1, 1.0, 10.0] {
            for (k, psi) in nonstationary_pit_filters(&sigma, &[alpha; 50], &ctx).iter().enumerate() {
                worst = worst.max(max_abs_diff(&psi.values, &stationary_pit_filters(&sigma, alpha, k + 1).values));
            }
        }
    }
    Check {
        name: "fixed-alpha recursion vs closed form",
        pass: worst <= 1e-12,
        detail: format!("max deviation {worst:.1e}"),
    }
}

/// Dense zero-boundary convolution on column-major images.
fn dense_convolution(psf: &Matrix, rows: usize, cols: usize) -> Matrix {
    let c = (psf.rows() / 2) as isize;
    let mut a = Matrix::zeros(rows * cols, rows * cols);
    for j in 0..cols as isize {
        for i in 0..rows as isize {
            for k in 0..psf.rows() as isize {
                for l in 0..psf.cols() as isize {
                    let (si, sj) = (i + c - k, j + c - l);
                    if si >= 0 && sj >= 0 && si < rows as isize && sj < cols as isize {
                        let (r, s) = ((i + j * rows as isize) as usize, (si + sj * rows as isize) as usize);
                        a.set(r, s, a.get(r, s) + psf.get(k as usize, l as usize));
                    }
                }
            }
        }
    }
    a
}

fn kronecker() -> pit_core::Result<Check> {
    let psf = defocus_psf(7, 3.0)?;
    let op = kron_factors_from_psf(&psf, psf_rank(&psf)?, 8, 8)?;
    let dense = dense_convolution(&psf, 8, 8);
    let worst = op.to_dense().sub(&dense)?.max_abs();
    let x = NoiseRng::new(3).normal_vec(64);
    let ctx = PrecisionContext::fp64();
    let y = op.apply(&x, &ctx)?;
    let z = NoiseRng::new(4).normal_vec(64);
    let adjoint = (ctx.dot(&y, &z)? - ctx.dot(&x, &op.apply_transpose(&z, &ctx)?)?).abs();
    Ok(Check {
        name: "Kronecker operator vs dense convolution",
        pass: worst <= 1e-10 && adjoint <= 1e-12 * 64.0,
        detail: format!("max entry deviation {worst:.1e}, adjoint gap {adjoint:.1e}"),
    })
}

fn landweber() -> pit_core::Result<Check> {
    let sigma: Vec<f64> = (1..=10).map(|j| 1.0 / j as f64).collect();
    let n = sigma.len();
    let a = Matrix::from_fn(n, n, |i, j| if i == j { sigma[i] } else { 0.0 });
    let b = vec![1.0; n];
    let ctx = PrecisionContext::fp64();
    let svd = SmallSvd {
        left_vectors: Matrix::identity(n),
        singular_values: sigma.clone(),
        right_vectors: Matrix::identity(n),
    };
    let mut x = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for k in 1..=20 {
        x = landweber_step(&a, &x, &b, 1.0, &ctx)?;
        let omega = effective_filters(&x, &svd, &b, k, &ctx)?;
        worst = worst.max(max_abs_diff(&omega.values, &landweber_filters(&sigma, k)?.values));
    }
    Ok(Check {
        name: "Landweber effective factors",
        pass: worst <= 1e-10,
        detail: format!("max deviation {worst:.1e}"),
    })
}

fn solver_synthesis() -> pit_core::Result<Check> {
    let prob = spectra_problem(64, 2.0, 3.0, 1)?;
    let ctx = PrecisionContext::fp64();
    let cfg = PitConfig {
        max_iter: 25,
        stop_on_discrepancy: false,
        capture_iterates: true,
        ..PitConfig::new(30, prob.epsilon)
    };
    let fact = factorize(&prob, 30, cfg.reorth, &ctx)?;
    let res = pit_solve_with_factorization(&fact, &cfg, None)?;
    let svd = jacobi_svd(&fact.b, &ctx)?;
    let mut worst: f64 = 0.0;
    for (y, psi) in res.iterates.iter().zip(nonstationary_pit_filters(&svd.singular_values, &res.alphas(), &ctx)) {
        let synth = filtered_synthesis(&svd, &psi, &fact.b_tilde, &ctx)?;
        let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(max_abs_diff(y, &synth) / scale);
    }
    Ok(Check {
        name: "PIT iterates vs filtered synthesis",
        pass: worst <= 1e-10,
        detail: format!("max relative deviation {worst:.1e}"),
    })
}

fn truncation() -> pit_core::Result<Check> {
    let prob = spectra_problem(64, 2.0, 3.0, 1)?;
    let mut same = true;
    for f in [FloatFormat::FP64, FloatFormat::FP16] {
        let ctx = PrecisionContext::op_level(f);
        let op = prob.operator.rounded(&f);
        let big = gkb(&op, &prob.b, 35, Reorthogonalization::Full, &ctx)?;
        same &= big.truncated(25)? == gkb(&op, &prob.b, 25, Reorthogonalization::Full, &ctx)?;
    }
    Ok(Check {
        name: "GKB truncation is bit-exact",
        pass: same,
        detail: "p = 35 truncated to 25 against a direct p = 25 run".into(),
    })
}

pub fn run_all() -> Vec<Check> {
    let fallible: [(&'static str, FallibleCheck); 4] = [
        ("Kronecker operator vs dense convolution", kronecker),
        ("Landweber effective factors", landweber),
        ("PIT iterates vs filtered synthesis", solver_synthesis),
        ("GKB truncation is bit-exact", truncation),
    ];
    let mut checks = vec![rounding(), fixed_alpha()];
    for (name, check) in fallible {
        checks.push(check().unwrap_or_else(|e| Check {
            name,
            pass: false,
            detail: e.to_string(),
        }));
    }
    checks
}
