use std::fmt::Write as _;

use pit_core::experiments::{filter_experiment, subspace_sweep};
use pit_core::filters::trajectory_csv;
use pit_core::linalg::{jacobi_svd_dense, PrecisionContext, SvdMode};
use pit_core::problems::{encode_pgm, kron_factors_from_psf, psf_rank, vec_to_image};
use pit_core::solvers::PitConfig;

use crate::config::{ExperimentConfig, ProblemKind};
use crate::error::{CliError, Result};
use crate::output::{create_dir, matrix_csv, vector_csv, write_atomic};

const SUMMARY_HEADER: &str =
    "cell,problem,precision,granularity,reorth,p,noise,epsilon,threshold,iterations,terminated_by,final_residual,final_rre\n";

/// PIT for every (noise, precision, reorth, p) cell. Each (noise,
/// precision, reorth) triple shares one factorization of the largest p.
pub fn solve(cfg: &ExperimentConfig) -> Result<()> {
    create_dir(&cfg.out)?;
    let p_max = cfg.ps.iter().copied().max().unwrap_or(1);
    let mut summary = String::from(SUMMARY_HEADER);
    for &mu in &cfg.noise {
        let problem = cfg.build_problem(mu)?;
        for &format in &cfg.precisions {
            let ctx = cfg.context(format);
            for &reorth in &cfg.reorth {
                let base = PitConfig {
                    eta: cfg.eta,
                    alpha_init: cfg.alpha_init,
                    max_iter: cfg.max_iter,
                    reorth,
                    ctx,
                    ..PitConfig::new(p_max, problem.epsilon)
                };
                let results = subspace_sweep(&problem, &cfg.ps, &base)?;
                for (&p, res) in cfg.ps.iter().zip(&results) {
                    let cell = format!("{}_{}_p{p}_mu{mu}_reorth-{reorth}", cfg.problem.name(), format.name());
                    write_atomic(&cfg.out.join(format!("history_{cell}.csv")), res.history_csv().as_bytes())?;
                    write_atomic(&cfg.out.join(format!("solution_{cell}.csv")), vector_csv("x", &res.x).as_bytes())?;
                    if let Some((rows, cols)) = problem.image_shape {
                        let img = vec_to_image(&res.x, rows, cols)?;
                        write_atomic(&cfg.out.join(format!("solution_{cell}.pgm")), &encode_pgm(&img))?;
                    }
                    let rre = res.final_rre().unwrap_or(f64::NAN);
                    let _ = writeln!(
                        summary,
                        "{cell},{},{},{},{reorth},{p},{mu},{},{},{},{},{},{rre}",
                        cfg.problem.name(),
                        format.name(),
                        ctx.granularity,
                        problem.epsilon,
                        res.threshold,
                        res.iterations,
                        res.terminated_by,
                        res.final_residual(),
                    );
                    println!(
                        "{cell}: rre {rre:.4} after {} iterations ({})",
                        res.iterations, res.terminated_by
                    );
                }
            }
        }
    }
    write_atomic(&cfg.out.join("summary.csv"), summary.as_bytes())
}

/// Predicted and effective filter factors on the 1D problem, without the
/// discrepancy stop, up to the largest requested iteration.
pub fn filters(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.problem != ProblemKind::Spectra {
        return Err(CliError::Validation("filters needs the spectra problem".into()));
    }
    create_dir(&cfg.out)?;
    let k_max = cfg.iterations.iter().copied().max().unwrap_or(1);
    let ks: Vec<usize> = (1..=k_max).collect();
    let mut summary = String::from("cell,precision,p,noise,k,mean,min,max,std,undefined\n");
    for &mu in &cfg.noise {
        let problem = cfg.build_problem(mu)?;
        for &format in &cfg.precisions {
            let ctx = cfg.context(format);
            for &p in &cfg.ps {
                let exp = filter_experiment(&problem, p, k_max, &ks, &ctx, cfg.svd)?;
                let cell = format!("{}_p{p}_mu{mu}", format.name());
                let effective: Vec<_> = exp.comparisons.iter().map(|c| c.effective.clone()).collect();
                write_atomic(
                    &cfg.out.join(format!("filters_{cell}_predicted.csv")),
                    trajectory_csv(&exp.trajectory).as_bytes(),
                )?;
                write_atomic(&cfg.out.join(format!("filters_{cell}_effective.csv")), trajectory_csv(&effective).as_bytes())?;
                write_atomic(
                    &cfg.out.join(format!("filters_{cell}_singular_values.csv")),
                    vector_csv("sigma", &exp.svd.singular_values).as_bytes(),
                )?;
                for c in exp.comparisons.iter().filter(|c| cfg.iterations.contains(&c.k)) {
                    let s = c.stats;
                    let _ = writeln!(
                        summary,
                        "{cell},{},{p},{mu},{},{},{},{},{},{}",
                        format.name(),
                        c.k,
                        s.mean,
                        s.min,
                        s.max,
                        s.std,
                        s.undefined
                    );
                    println!("{cell} k={}: mean |Φ − Ω| {:.2e}, max {:.2e}", c.k, s.mean, s.max);
                }
            }
        }
    }
    write_atomic(&cfg.out.join("filters_summary.csv"), summary.as_bytes())
}

/// The PSF, its singular values and the relative error of each Kronecker
/// truncation.
pub fn psf(cfg: &ExperimentConfig) -> Result<()> {
    let kind = cfg
        .psf_kind()
        .ok_or_else(|| CliError::Validation("psf needs gauss2d or defocus2d".into()))?;
    create_dir(&cfg.out)?;
    let psf = kind.psf()?;
    let svd = jacobi_svd_dense(&psf, &PrecisionContext::fp64(), SvdMode::WorkingPrecision)?;
    let sigma = &svd.singular_values;
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let rank = psf_rank(&psf)?;
    let mut table = String::from("terms,singular_value,relative_truncation_error\n");
    for k in 1..=rank {
        let tail: f64 = sigma[k..].iter().map(|s| s * s).sum();
        let _ = writeln!(table, "{k},{},{}", sigma[k - 1], (tail / total).sqrt());
    }
    let name = cfg.problem.name();
    write_atomic(&cfg.out.join(format!("psf_{name}.csv")), matrix_csv(&psf).as_bytes())?;
    write_atomic(&cfg.out.join(format!("psf_{name}_terms.csv")), table.as_bytes())?;
    let peak = psf.max_abs();
    let scaled = pit_core::linalg::Matrix::from_fn(psf.rows(), psf.cols(), |i, j| psf.get(i, j) / peak);
    write_atomic(&cfg.out.join(format!("psf_{name}.pgm")), &encode_pgm(&scaled))?;

    let terms = cfg.terms.unwrap_or(if cfg.problem == ProblemKind::Gauss2d { 1 } else { 6 });
    let op = kron_factors_from_psf(&psf, terms, 8, 8)?;
    let mut factors = String::from("term,factor,bandwidth,coefficient_sum\n");
    for (t, term) in op.terms().iter().enumerate() {
        for (label, f) in [("row", &term.row_factor), ("col", &term.col_factor)] {
            let _ = writeln!(factors, "{},{label},{},{}", t + 1, f.coeffs().len(), f.coeffs().iter().sum::<f64>());
        }
    }
    write_atomic(&cfg.out.join(format!("psf_{name}_factors.csv")), factors.as_bytes())?;
    println!(
        "{name}: {}×{} PSF of rank {rank}; {} Kronecker terms kept",
        psf.rows(),
        psf.cols(),
        op.len()
    );
    Ok(())
}
