//! Drivers shared by the command-line tool and the acceptance suite.

use crate::error::{Error, Result};
use crate::filters::{difference_stats, effective_filters, nonstationary_pit_filters, DifferenceStats, FilterSet};
use crate::krylov::{GkbFactorization, Reorthogonalization};
use crate::linalg::{jacobi_svd_dense, PrecisionContext, SmallSvd, SvdMode};
use crate::problems::TestProblem;
use crate::solvers::{factorize, pit_solve_with_factorization, PitConfig, SolveResult};

/// Predicted against effective filter factors at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterComparison {
    pub k: usize,
    pub predicted: FilterSet,
    pub effective: FilterSet,
    pub stats: DifferenceStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterExperiment {
    pub factorization: GkbFactorization,
    pub svd: SmallSvd,
    pub solve: SolveResult,
    /// Recursion factors ψ^(1), …, ψ^(max_iter).
    pub trajectory: Vec<FilterSet>,
    pub comparisons: Vec<FilterComparison>,
}

/// Runs PIT for `max_iter` iterations without the discrepancy stop and
/// compares the recursion factors built from the α history with the factors
/// read off each requested iterate.
pub fn filter_experiment(
    problem: &TestProblem,
    p: usize,
    max_iter: usize,
    ks: &[usize],
    ctx: &PrecisionContext,
    svd_mode: SvdMode,
) -> Result<FilterExperiment> {
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > max_iter) {
        return Err(Error::InvalidParameter(format!("iteration {k} outside 1..={max_iter}")));
    }
    let factorization = factorize(problem, p, Reorthogonalization::Full, ctx)?;
    let cfg = PitConfig {
        ctx: *ctx,
        max_iter,
        stop_on_discrepancy: false,
        capture_iterates: true,
        ..PitConfig::new(p, problem.epsilon)
    };
    let solve = pit_solve_with_factorization(&factorization, &cfg, Some(&problem.x_true))?;
    let svd = jacobi_svd_dense(&factorization.b.to_dense(), ctx, svd_mode)?;
    let trajectory = nonstationary_pit_filters(&svd.singular_values, &solve.alphas(), ctx);
    let comparisons = ks
        .iter()
        .map(|&k| {
            let effective = effective_filters(&solve.iterates[k - 1], &svd, &factorization.b_tilde, k, ctx)?;
            let predicted = trajectory[k - 1].clone();
            let stats = difference_stats(&predicted, &effective)?;
            Ok(FilterComparison {
                k,
                predicted,
                effective,
                stats,
            })
        })
        .collect::<Result<_>>()?;
    Ok(FilterExperiment {
        factorization,
        svd,
        solve,
        trajectory,
        comparisons,
    })
}

/// Solves for every subspace size in `ps` from one factorization of the
/// largest size, which truncation reproduces bit for bit.
pub fn subspace_sweep(problem: &TestProblem, ps: &[usize], base: &PitConfig) -> Result<Vec<SolveResult>> {
    let p_max = ps.iter().copied().max().ok_or_else(|| Error::InvalidParameter("no subspace sizes".into()))?;
    let fact = factorize(problem, p_max, base.reorth, &base.ctx)?;
    ps.iter()
        .map(|&p| pit_solve_with_factorization(&fact, &PitConfig { p, ..base.clone() }, Some(&problem.x_true)))
        .collect()
}
