//! Landweber, dense iterated Tikhonov and the nonstationary projected
//! iterated Tikhonov (PIT) method.

use std::fmt;
use std::fmt::Write as _;

use log::debug;

use crate::error::{Error, Result};
use crate::krylov::{gkb, GkbFactorization, LinearOperator, Reorthogonalization};
use crate::linalg::{check_len, regularized_normal_solve, BidiagonalMatrix, Matrix, PrecisionContext};
use crate::precision::FloatFormat;
use crate::problems::{rre, TestProblem};

/// One Landweber step x + ζAᵀ(b − Ax).
pub fn landweber_step(
    a: &dyn LinearOperator,
    x: &[f64],
    b: &[f64],
    zeta: f64,
    ctx: &PrecisionContext,
) -> Result<Vec<f64>> {
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter(format!("relaxation must be positive, got {zeta}")));
    }
    let r = ctx.sub_vec(b, &a.apply(x, ctx)?)?;
    let g = a.apply_transpose(&r, ctx)?;
    let mut out = x.to_vec();
    ctx.axpy(zeta, &g, &mut out);
    Ok(out)
}

/// One iterated Tikhonov step x + (AᵀA + α²I)⁻¹Aᵀ(b − Ax) with a dense
/// Cholesky solve.
pub fn iterated_tikhonov_step(a: &Matrix, x: &[f64], b: &[f64], alpha: f64, ctx: &PrecisionContext) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let r = ctx.sub_vec(b, &ctx.gemv(a, x)?)?;
    let g = ctx.gemv_t(a, &r)?;
    let h = a.solve_regularized_normal(alpha, &g, ctx)?;
    Ok(x.iter().zip(&h).map(|(&xi, &hi)| ctx.add(xi, hi)).collect())
}

/// ‖r‖ ≤ η·ε
pub fn discrepancy_satisfied(residual_norm: f64, eta: f64, epsilon: f64) -> bool {
    residual_norm <= eta * epsilon
}

/// Smallest α the secant update may return.
pub fn alpha_floor(format: &FloatFormat) -> f64 {
    if *format == FloatFormat::FP64 {
        1e-12
    } else if *format == FloatFormat::FP32 {
        1e-6
    } else if *format == FloatFormat::FP16 {
        1e-3
    } else {
        format.round(1e-12f64.max(2.0 * format.unit_roundoff()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Discrepancy,
    MaxIter,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Discrepancy => "discrepancy",
            Termination::MaxIter => "max_iter",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitConfig {
    pub p: usize,
    pub eta: f64,
    pub epsilon: f64,
    pub alpha_init: f64,
    pub max_iter: usize,
    pub reorth: Reorthogonalization,
    pub ctx: PrecisionContext,
    /// Stop at the first iterate meeting the discrepancy principle.
    pub stop_on_discrepancy: bool,
    /// Keep α constant instead of running the secant update.
    pub fixed_alpha: Option<f64>,
    /// Keep every y^(k) in the result.
    pub capture_iterates: bool,
}

impl PitConfig {
    pub fn new(p: usize, epsilon: f64) -> Self {
        PitConfig {
            p,
            eta: 1.01,
            epsilon,
            alpha_init: 1.0,
            max_iter: 20,
            reorth: Reorthogonalization::Full,
            ctx: PrecisionContext::fp64(),
            stop_on_discrepancy: true,
            fixed_alpha: None,
            capture_iterates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.p == 0 {
            return bad("p must be at least 1".into());
        }
        if !(self.eta > 1.0) {
            return bad(format!("eta must exceed 1, got {}", self.eta));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.alpha_init > 0.0) {
            return bad(format!("initial alpha must be positive, got {}", self.alpha_init));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if let Some(a) = self.fixed_alpha {
            if !(a > 0.0) {
                return bad(format!("fixed alpha must be positive, got {a}"));
            }
        }
        Ok(())
    }

    /// η·ε in the working format.
    pub fn threshold(&self) -> f64 {
        self.ctx.mul(self.eta, self.ctx.round(self.epsilon))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// α^(k), the parameter that produced y^(k).
    pub alpha: f64,
    /// φ^(k) = ‖b̃ − B y^(k)‖
    pub residual_norm: f64,
    /// γ^(k) = ‖b̃ − B y₀^(k)‖; absent when the iteration stopped before the
    /// companion update.
    pub gamma: Option<f64>,
    pub rre: Option<f64>,
    /// The unregularized companion solve needed a small ridge.
    pub ridge_fallback: bool,
}

/// Mutable state of a PIT run.
#[derive(Debug, Clone, PartialEq)]
pub struct PitState {
    pub k: usize,
    pub y: Vec<f64>,
    pub r_tilde: Vec<f64>,
    pub alpha: f64,
    pub y0: Vec<f64>,
    pub r0_tilde: Vec<f64>,
    pub gamma: f64,
    pub phi: f64,
    pub history: Vec<IterationRecord>,
}

impl PitState {
    fn new(b_tilde: &[f64], p: usize, alpha: f64, ctx: &PrecisionContext) -> Self {
        let r = b_tilde.to_vec();
        let nrm = ctx.norm2(&r);
        PitState {
            k: 0,
            y: vec![0.0; p],
            r_tilde: r.clone(),
            alpha,
            y0: vec![0.0; p],
            r0_tilde: r,
            gamma: nrm,
            phi: nrm,
            history: Vec::new(),
        }
    }
}

/// |(ηε − γ)/(φ − γ)|·α for the current state, bounded below by the
/// format's α floor. A flat secant (φ = γ) leaves α unchanged.
pub fn secant_update(state: &PitState, eta_eps: f64, ctx: &PrecisionContext) -> f64 {
    let denom = ctx.sub(state.phi, state.gamma);
    if denom == 0.0 {
        return state.alpha;
    }
    let ratio = ctx.div(ctx.sub(eta_eps, state.gamma), denom).abs();
    let next = ctx.mul(ratio, state.alpha);
    if next.is_finite() {
        next.max(alpha_floor(&ctx.format))
    } else {
        state.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// x = V y in the working format.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub terminated_by: Termination,
    pub history: Vec<IterationRecord>,
    /// y^(1), y^(2), … when requested.
    pub iterates: Vec<Vec<f64>>,
    /// Subspace size actually used (smaller than requested after breakdown).
    pub p: usize,
    pub threshold: f64,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.residual_norm)
    }

    pub fn final_rre(&self) -> Option<f64> {
        self.history.last().and_then(|r| r.rre)
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.alpha).collect()
    }

    /// A discrepancy stop must be the first iterate at or below η·ε.
    pub fn check_discrepancy_contract(&self) -> Result<()> {
        if self.terminated_by != Termination::Discrepancy {
            return Ok(());
        }
        let last = self.history.last().ok_or_else(|| Error::DiscrepancyContract("empty history".into()))?;
        if !(last.residual_norm <= self.threshold) {
            return Err(Error::DiscrepancyContract(format!(
                "final residual {:e} exceeds {:e}",
                last.residual_norm, self.threshold
            )));
        }
        if let Some(prev) = self.history.iter().rev().nth(1) {
            if prev.residual_norm <= self.threshold {
                return Err(Error::DiscrepancyContract(format!(
                    "iterate {} already met the threshold",
                    prev.k
                )));
            }
        }
        Ok(())
    }

    /// CSV with header `k,alpha,residual_norm,gamma,rre,ridge_fallback`.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("k,alpha,residual_norm,gamma,rre,ridge_fallback\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.history {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{},{},{}",
                r.k,
                r.alpha,
                r.residual_norm,
                opt(r.gamma),
                opt(r.rre),
                r.ridge_fallback
            );
        }
        s
    }
}

/// Runs GKB on the problem (operator and data rounded to the working
/// format) and iterates PIT in the resulting subspace.
pub fn pit_solve(problem: &TestProblem, cfg: &PitConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let fact = factorize(problem, cfg.p, cfg.reorth, &cfg.ctx)?;
    pit_solve_with_factorization(&fact, cfg, Some(&problem.x_true))
}

/// GKB of the problem in the working format.
pub fn factorize(
    problem: &TestProblem,
    p: usize,
    reorth: Reorthogonalization,
    ctx: &PrecisionContext,
) -> Result<GkbFactorization> {
    let op = problem.operator.rounded(&ctx.format);
    gkb(&op, &problem.b, p, reorth, ctx)
}

/// PIT iterations on a precomputed factorization. `cfg.p` may be smaller
/// than the factorization, which is then truncated.
pub fn pit_solve_with_factorization(
    fact: &GkbFactorization,
    cfg: &PitConfig,
    x_true: Option<&[f64]>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let owned;
    let fact = if cfg.p < fact.p() {
        owned = fact.truncated(cfg.p)?;
        &owned
    } else {
        fact
    };
    if let Some(step) = fact.breakdown_step {
        debug!("GKB broke down at step {step}; working with p = {}", fact.p());
    }
    let ctx = &cfg.ctx;
    let b = &fact.b;
    let p = b.cols();
    let threshold = cfg.threshold();
    let mut state = PitState::new(&fact.b_tilde, p, cfg.fixed_alpha.unwrap_or(cfg.alpha_init), ctx);
    let mut iterates = Vec::new();
    let mut terminated_by = Termination::MaxIter;

    while state.k < cfg.max_iter {
        state.k += 1;
        let rhs = b.apply_transpose(&state.r_tilde, ctx)?;
        let h = regularized_normal_solve(b, state.alpha, &rhs, ctx)?;
        add_into(&mut state.y, &h, ctx);
        state.r_tilde = b.residual(&fact.b_tilde, &state.y, ctx)?;
        state.phi = ctx.norm2(&state.r_tilde);

        let rre_k = match x_true {
            Some(t) => Some(rre(&fact.project(&state.y, ctx)?, t)?),
            None => None,
        };
        if cfg.capture_iterates {
            iterates.push(state.y.clone());
        }
        let mut record = IterationRecord {
            k: state.k,
            alpha: state.alpha,
            residual_norm: state.phi,
            gamma: None,
            rre: rre_k,
            ridge_fallback: false,
        };

        if cfg.stop_on_discrepancy && state.phi <= threshold {
            state.history.push(record);
            terminated_by = Termination::Discrepancy;
            break;
        }

        record.ridge_fallback = companion_step(b, &fact.b_tilde, &mut state, ctx)?;
        record.gamma = Some(state.gamma);
        state.history.push(record);
        if cfg.fixed_alpha.is_none() {
            state.alpha = secant_update(&state, threshold, ctx);
        }
    }

    let x = fact.project(&state.y, ctx)?;
    let result = SolveResult {
        x,
        y: state.y,
        iterations: state.k,
        terminated_by,
        history: state.history,
        iterates,
        p,
        threshold,
    };
    result.check_discrepancy_contract()?;
    Ok(result)
}

fn add_into(y: &mut [f64], h: &[f64], ctx: &PrecisionContext) {
    for (yi, &hi) in y.iter_mut().zip(h) {
        *yi = ctx.add(*yi, hi);
    }
}

/// Advances the unregularized companion iterate and refreshes γ. Returns
/// whether the α = 0 solve had to be replaced by a ridge solve.
fn companion_step(b: &BidiagonalMatrix, b_tilde: &[f64], state: &mut PitState, ctx: &PrecisionContext) -> Result<bool> {
    check_len(b.cols(), state.y0.len())?;
    let rhs = b.apply_transpose(&state.r0_tilde, ctx)?;
    let (h, ridge) = match regularized_normal_solve(b, 0.0, &rhs, ctx) {
        Ok(h) if h.iter().all(|v| v.is_finite()) => (h, false),
        Ok(_) | Err(Error::NonPositivePivot { .. }) => {
            let ridge = ctx.mul(ctx.unit_roundoff(), ctx.round(b.frobenius_norm()));
            (regularized_normal_solve(b, ridge, &rhs, ctx)?, true)
        }
        Err(e) => return Err(e),
    };
    add_into(&mut state.y0, &h, ctx);
    state.r0_tilde = b.residual(b_tilde, &state.y0, ctx)?;
    state.gamma = ctx.norm2(&state.r0_tilde);
    Ok(ridge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::gkb;

    #[test]
    fn landweber_examples() {
        let ctx = PrecisionContext::fp64();
        let id = Matrix::identity(2);
        assert_eq!(landweber_step(&id, &[0.0, 0.0], &[3.0, 4.0], 1.0, &ctx).unwrap(), vec![3.0, 4.0]);
        let a = Matrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 0.5]).unwrap();
        let x = [2.0, 2.0];
        let b = ctx.gemv(&a, &x).unwrap();
        assert_eq!(landweber_step(&a, &x, &b, 0.7, &ctx).unwrap(), x.to_vec());
        let mut x = vec![0.0, 0.0];
        for _ in 0..2 {
            x = landweber_step(&a, &x, &[1.0, 1.0], 1.0, &ctx).unwrap();
        }
        // x_j = φ_j / σ_j with φ = 1 − (1 − σ²)²
        assert_eq!(x[0], 1.0);
        assert!((x[1] * 0.5 - 0.4375).abs() < 1e-15);
        assert!(landweber_step(&a, &x, &[1.0, 1.0], 0.0, &ctx).is_err());
    }

    #[test]
    fn tikhonov_examples() {
        let ctx = PrecisionContext::fp64();
        let id = Matrix::identity(3);
        let b = [2.0, -4.0, 6.0];
        let half = iterated_tikhonov_step(&id, &[0.0; 3], &b, 1.0, &ctx).unwrap();
        for (h, e) in half.iter().zip([1.0, -2.0, 3.0]) {
            assert!((h - e).abs() < 1e-15);
        }
        let a = Matrix::from_row_major(3, 2, vec![1.0, 0.2, 0.0, 0.5, 0.3, 0.1]).unwrap();
        let alpha = 1e3;
        let x = iterated_tikhonov_step(&a, &[0.0; 2], &b, alpha, &ctx).unwrap();
        let atb = ctx.gemv_t(&a, &b).unwrap();
        assert!(ctx.norm2(&x) <= ctx.norm2(&atb) / (alpha * alpha));
        assert!(iterated_tikhonov_step(&a, &[0.0; 2], &b, 0.0, &ctx).is_err());
    }

    #[test]
    fn tikhonov_refinement_reduces_residual() {
        let ctx = PrecisionContext::fp64();
        let a = Matrix::from_row_major(3, 2, vec![1.0, 0.2, 0.0, 0.5, 0.3, 0.1]).unwrap();
        let b = [1.0, 2.0, 0.5];
        let res = |x: &[f64]| ctx.norm2(&ctx.sub_vec(&b, &ctx.gemv(&a, x).unwrap()).unwrap());
        let x1 = iterated_tikhonov_step(&a, &[0.0; 2], &b, 0.5, &ctx).unwrap();
        let x2 = iterated_tikhonov_step(&a, &x1, &b, 0.5, &ctx).unwrap();
        assert!(res(&x2) < res(&x1));
    }

    #[test]
    fn discrepancy_examples() {
        assert!(discrepancy_satisfied(1.0, 1.01, 1.0));
        assert!(!discrepancy_satisfied(1.02, 1.01, 1.0));
        assert!(discrepancy_satisfied(1.01 * 2.0, 1.01, 2.0));
    }

    fn state(alpha: f64, gamma: f64, phi: f64) -> PitState {
        let mut s = PitState::new(&[1.0], 1, alpha, &PrecisionContext::fp64());
        s.gamma = gamma;
        s.phi = phi;
        s
    }

    #[test]
    fn secant_examples() {
        let ctx = PrecisionContext::fp64();
        assert!((secant_update(&state(1.0, 0.5, 2.0), 1.0, &ctx) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(secant_update(&state(1.0, 1.0, 2.0), 1.0, &ctx), 1e-12);
        assert_eq!(secant_update(&state(0.7, 0.5, 1.0), 1.0, &ctx), 0.7);
        assert_eq!(secant_update(&state(0.7, 0.5, 0.5), 1.0, &ctx), 0.7);
        let fp16 = PrecisionContext::op_level(FloatFormat::FP16);
        assert_eq!(secant_update(&state(1.0, 1.0, 2.0), 1.0, &fp16), 1e-3);
    }

    #[test]
    fn config_validation() {
        assert!(PitConfig::new(5, 1.0).validate().is_ok());
        assert!(PitConfig::new(0, 1.0).validate().is_err());
        assert!(PitConfig::new(5, 0.0).validate().is_err());
        let mut c = PitConfig::new(5, 1.0);
        c.eta = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn huge_epsilon_stops_at_first_iterate() {
        let ctx = PrecisionContext::fp64();
        let a = Matrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
        let b = ctx.gemv(&a, &[1.0; 6]).unwrap();
        let f = gkb(&a, &b, 4, Reorthogonalization::Full, &ctx).unwrap();
        let res = pit_solve_with_factorization(&f, &PitConfig::new(4, 1e3), None).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.terminated_by, Termination::Discrepancy);
        assert!(res.check_discrepancy_contract().is_ok());
    }
}
