//! `pit`: runs projected iterated Tikhonov experiments across simulated
//! floating-point formats and writes CSV tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{read_pairs, ExperimentConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "pit", version, about = "Projected iterated Tikhonov experiments in simulated precisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve every (noise, precision, reorth, p) cell and write histories,
    /// solutions and summary.csv.
    Solve(Settings),
    /// Compare predicted and effective filter factors on the spectra problem.
    Filters(Settings),
    /// Run the built-in oracle checks.
    Verify,
    /// Write the PSF and its Kronecker factor diagnostics.
    Psf(Settings),
}

/// Every flag overrides the key of the same name in the config file.
#[derive(Debug, Args)]
struct Settings {
    /// Flat `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// spectra, gauss2d or defocus2d.
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated formats: fp64, fp32, fp16 or e<exponent>m<mantissa>,
    /// each optionally suffixed with -nosub.
    #[arg(long)]
    precision: Option<String>,
    /// Comma-separated subspace sizes.
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated noise levels in percent.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    alpha_init: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// on, off or both as `on,off`.
    #[arg(long)]
    reorth: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Grayscale graymap used as the true image.
    #[arg(long)]
    image: Option<String>,
    /// Kronecker terms of the blur operator.
    #[arg(long)]
    terms: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// op, kernel or auto.
    #[arg(long)]
    granularity: Option<String>,
    /// Iterations summarized by `filters`.
    #[arg(long)]
    iterations: Option<String>,
    /// SVD of the projected matrix for `filters`: working or binary64.
    #[arg(long)]
    svd: Option<String>,
}

impl Settings {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut pairs = match &self.config {
            Some(path) => read_pairs(path)?,
            None => Vec::new(),
        };
        let flags = [
            ("problem", &self.problem),
            ("precision", &self.precision),
            ("p", &self.p),
            ("noise", &self.noise),
            ("eta", &self.eta),
            ("alpha_init", &self.alpha_init),
            ("max_iter", &self.max_iter),
            ("reorth", &self.reorth),
            ("seed", &self.seed),
            ("image", &self.image),
            ("terms", &self.terms),
            ("out", &self.out),
            ("granularity", &self.granularity),
            ("iterations", &self.iterations),
            ("svd", &self.svd),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        ExperimentConfig::from_pairs(&pairs)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(s) => commands::solve(&s.resolve()?),
        Command::Filters(s) => commands::filters(&s.resolve()?),
        Command::Psf(s) => commands::psf(&s.resolve()?),
        Command::Verify => {
            let checks = verify::run_all();
            for c in &checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            match checks.iter().filter(|c| !c.pass).count() {
                0 => Ok(()),
                failed => Err(CliError::Verification { failed }),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
