//! Experiment settings from a flat `key = value` file and command-line
//! overrides.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored; keys are case-insensitive and `-` equals `_`. List
//! values are comma separated. Later pairs override earlier ones, and
//! command-line flags are applied after the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use pit_core::krylov::Reorthogonalization;
use pit_core::linalg::{Granularity, PrecisionContext, SvdMode};
use pit_core::precision::FloatFormat;
use pit_core::problems::{spectra_problem, Blur2dOptions, PsfKind, TestProblem};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Spectra,
    Gauss2d,
    Defocus2d,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Spectra => "spectra",
            ProblemKind::Gauss2d => "gauss2d",
            ProblemKind::Defocus2d => "defocus2d",
        }
    }

    pub fn is_image(&self) -> bool {
        *self != ProblemKind::Spectra
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spectra" => Ok(ProblemKind::Spectra),
            "gauss2d" | "gauss" => Ok(ProblemKind::Gauss2d),
            "defocus2d" | "defocus" => Ok(ProblemKind::Defocus2d),
            _ => Err("expected spectra, gauss2d or defocus2d".into()),
        }
    }
}

/// Rounding granularity; `Auto` picks op level for the 1D problem and
/// kernel level for images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GranularityChoice {
    Auto,
    Fixed(Granularity),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub image: Option<PathBuf>,
    /// Spectra size and Gaussian width.
    pub n: usize,
    pub rho: f64,
    pub spread: f64,
    pub radius: f64,
    /// Kronecker terms; 1 for gauss2d and 6 for defocus2d when unset.
    pub terms: Option<usize>,
    pub precisions: Vec<FloatFormat>,
    pub ps: Vec<usize>,
    pub noise: Vec<f64>,
    pub eta: f64,
    pub alpha_init: f64,
    pub max_iter: usize,
    pub reorth: Vec<Reorthogonalization>,
    pub seed: u64,
    pub out: PathBuf,
    pub granularity: GranularityChoice,
    /// Iterations reported by `filters`.
    pub iterations: Vec<usize>,
    pub svd: SvdMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemKind::Spectra,
            image: None,
            n: 64,
            rho: 2.0,
            spread: 4.0,
            radius: 7.0,
            terms: None,
            precisions: vec![FloatFormat::FP64, FloatFormat::FP32, FloatFormat::FP16],
            ps: vec![30],
            noise: vec![3.0],
            eta: 1.01,
            alpha_init: 1.0,
            max_iter: 20,
            reorth: vec![Reorthogonalization::Full],
            seed: 1,
            out: PathBuf::from("out"),
            granularity: GranularityChoice::Auto,
            iterations: vec![1, 10, 25],
            svd: SvdMode::Binary64ThenRound,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: ToString,
{
    value.parse().map_err(|e: T::Err| CliError::invalid(key, value, e.to_string()))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: ToString,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(CliError::invalid(key, value, "empty list"));
    }
    Ok(items)
}

/// Splits a config text into normalized `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::ConfigSyntax {
            line: idx + 1,
            message: format!("expected `key = value`, found {line:?}"),
        })?;
        let key = normalize_key(key);
        if key.is_empty() {
            return Err(CliError::ConfigSyntax {
                line: idx + 1,
                message: "empty key".into(),
            });
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pairs(&text)
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = normalize_key(key);
        let k = key.as_str();
        match k {
            "problem" => self.problem = parse(k, value)?,
            "image" => self.image = Some(PathBuf::from(value)),
            "n" => self.n = parse(k, value)?,
            "rho" => self.rho = parse(k, value)?,
            "spread" => self.spread = parse(k, value)?,
            "radius" => self.radius = parse(k, value)?,
            "terms" => self.terms = Some(parse(k, value)?),
            "precision" => self.precisions = parse_list(k, value)?,
            "p" => self.ps = parse_list(k, value)?,
            "noise" => self.noise = parse_list(k, value)?,
            "eta" => self.eta = parse(k, value)?,
            "alpha_init" => self.alpha_init = parse(k, value)?,
            "max_iter" => self.max_iter = parse(k, value)?,
            "reorth" => self.reorth = parse_list(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            "out" => self.out = PathBuf::from(value),
            "granularity" => {
                self.granularity = match value {
                    "auto" => GranularityChoice::Auto,
                    other => GranularityChoice::Fixed(parse(k, other)?),
                }
            }
            "iterations" => self.iterations = parse_list(k, value)?,
            "svd" => {
                self.svd = match value {
                    "working" => SvdMode::WorkingPrecision,
                    "binary64" => SvdMode::Binary64ThenRound,
                    _ => return Err(CliError::invalid(k, value, "expected working or binary64")),
                }
            }
            _ => return Err(CliError::UnknownKey(key)),
        }
        Ok(())
    }

    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        if self.precisions.is_empty() || self.ps.is_empty() || self.noise.is_empty() || self.reorth.is_empty() {
            return fail("precision, p, noise and reorth need at least one value".into());
        }
        if let Some(p) = self.ps.iter().find(|&&p| p == 0) {
            return fail(format!("subspace size {p} must be positive"));
        }
        if let Some(mu) = self.noise.iter().find(|mu| !(**mu > 0.0 && mu.is_finite())) {
            return fail(format!("noise level {mu} must be a positive percentage"));
        }
        if !(self.eta > 1.0) {
            return fail(format!("eta {} must exceed 1", self.eta));
        }
        if !(self.alpha_init > 0.0 && self.alpha_init.is_finite()) {
            return fail(format!("alpha_init {} must be positive", self.alpha_init));
        }
        if self.max_iter == 0 {
            return fail("max_iter must be positive".into());
        }
        if self.iterations.contains(&0) {
            return fail("filter iterations start at 1".into());
        }
        if self.terms == Some(0) {
            return fail("terms must be positive".into());
        }
        if let Some(path) = &self.image {
            if !self.problem.is_image() {
                return fail("an image applies only to gauss2d and defocus2d".into());
            }
            if !path.is_file() {
                return fail(format!("image {} does not exist", path.display()));
            }
        }
        Ok(())
    }

    pub fn context(&self, format: FloatFormat) -> PrecisionContext {
        let granularity = match self.granularity {
            GranularityChoice::Fixed(g) => g,
            GranularityChoice::Auto if self.problem.is_image() => Granularity::KernelLevel,
            GranularityChoice::Auto => Granularity::OpLevel,
        };
        PrecisionContext::new(format, granularity)
    }

    pub fn build_problem(&self, mu: f64) -> Result<TestProblem> {
        let image = match &self.image {
            Some(path) => Some(pit_core::problems::read_pgm(path)?),
            None => None,
        };
        let problem = match self.problem {
            ProblemKind::Spectra => spectra_problem(self.n, self.rho, mu, self.seed)?,
            ProblemKind::Gauss2d => Blur2dOptions {
                psf: PsfKind::Gaussian { spread: self.spread },
                terms: self.terms.unwrap_or(1),
                image,
                mu,
                seed: self.seed,
            }
            .build()?,
            ProblemKind::Defocus2d => Blur2dOptions {
                psf: PsfKind::Defocus { radius: self.radius },
                terms: self.terms.unwrap_or(6),
                image,
                mu,
                seed: self.seed,
            }
            .build()?,
        };
        Ok(problem)
    }

    pub fn psf_kind(&self) -> Option<PsfKind> {
        match self.problem {
            ProblemKind::Spectra => None,
            ProblemKind::Gauss2d => Some(PsfKind::Gaussian { spread: self.spread }),
            ProblemKind::Defocus2d => Some(PsfKind::Defocus { radius: self.radius }),
        }
    }
}
