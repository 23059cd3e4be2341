//! Filter factors of Landweber and PIT iterations, and effective factors
//! read off a computed iterate.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{check_len, PrecisionContext, SmallSvd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Landweber,
    StationaryPit,
    NonstationaryPit,
    Effective,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Landweber => "landweber",
            FilterKind::StationaryPit => "stationary_pit",
            FilterKind::NonstationaryPit => "nonstationary_pit",
            FilterKind::Effective => "effective",
        })
    }
}

/// Filter factors at iteration `k`. Undefined entries hold NaN and are
/// listed in `undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSet {
    pub kind: FilterKind,
    pub k: usize,
    pub values: Vec<f64>,
    pub undefined: Vec<usize>,
}

impl FilterSet {
    fn defined(kind: FilterKind, k: usize, values: Vec<f64>) -> Self {
        FilterSet {
            kind,
            k,
            values,
            undefined: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// φ_j = 1 − (1 − σ_j²)^k for singular values of an operator scaled to σ ≤ 1.
pub fn landweber_filters(sigma: &[f64], k: usize) -> Result<FilterSet> {
    if let Some(s) = sigma.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidParameter(format!("singular value {s} outside [0, 1]")));
    }
    let values = sigma.iter().map(|s| 1.0 - (1.0 - s * s).powi(k as i32)).collect();
    Ok(FilterSet::defined(FilterKind::Landweber, k, values))
}

/// ψ_i = 1 − (α²/(σ_i² + α²))^k for a constant α.
pub fn stationary_pit_filters(sigma_hat: &[f64], alpha: f64, k: usize) -> FilterSet {
    let a2 = alpha * alpha;
    let values = sigma_hat
        .iter()
        .map(|s| {
            let s2 = s * s;
            if s2 == 0.0 {
                0.0
            } else {
                1.0 - (a2 / (s2 + a2)).powi(k as i32)
            }
        })
        .collect();
    FilterSet::defined(FilterKind::StationaryPit, k, values)
}

/// Trajectory ψ^(1), …, ψ^(k) of the recursion
/// ψ^(k) = c + (1 − c)ψ^(k−1), c = σ²/(σ² + α_k²), ψ^(0) = 0,
/// evaluated under `ctx`.
pub fn nonstationary_pit_filters(sigma_hat: &[f64], alphas: &[f64], ctx: &PrecisionContext) -> Vec<FilterSet> {
    let mut psi = vec![0.0; sigma_hat.len()];
    let mut out = Vec::with_capacity(alphas.len());
    for (idx, &alpha) in alphas.iter().enumerate() {
        let a2 = ctx.mul(alpha, alpha);
        for (p, &s) in psi.iter_mut().zip(sigma_hat) {
            let s2 = ctx.mul(s, s);
            if s2 == 0.0 {
                continue;
            }
            let c = ctx.div(s2, ctx.add(s2, a2));
            *p = ctx.add(c, ctx.mul(ctx.sub(1.0, c), *p));
        }
        out.push(FilterSet::defined(FilterKind::NonstationaryPit, idx + 1, psi.clone()));
    }
    out
}

/// ω_j = σ̂_j (v̂_jᵀy)/(û_jᵀb̃) under `ctx`; undefined when the denominator
/// rounds to zero.
pub fn effective_filters(y: &[f64], svd: &SmallSvd, b_tilde: &[f64], k: usize, ctx: &PrecisionContext) -> Result<FilterSet> {
    let p = svd.singular_values.len();
    check_len(p, y.len())?;
    check_len(svd.left_vectors.rows(), b_tilde.len())?;
    let mut values = Vec::with_capacity(p);
    let mut undefined = Vec::new();
    for j in 0..p {
        let num = ctx.dot(&svd.right_vector(j), y)?;
        let den = ctx.dot(&svd.left_vector(j), b_tilde)?;
        if den == 0.0 {
            values.push(f64::NAN);
            undefined.push(j);
        } else {
            values.push(ctx.div(ctx.mul(svd.singular_values[j], num), den));
        }
    }
    Ok(FilterSet {
        kind: FilterKind::Effective,
        k,
        values,
        undefined,
    })
}

/// Σ_j φ_j (û_jᵀb̃/σ̂_j) v̂_j, skipping σ̂_j = 0.
pub fn filtered_synthesis(svd: &SmallSvd, filters: &FilterSet, b_tilde: &[f64], ctx: &PrecisionContext) -> Result<Vec<f64>> {
    let p = svd.singular_values.len();
    check_len(p, filters.len())?;
    check_len(svd.left_vectors.rows(), b_tilde.len())?;
    let mut y = vec![0.0; p];
    for j in 0..p {
        let s = svd.singular_values[j];
        if s == 0.0 {
            continue;
        }
        let coeff = ctx.mul(filters.values[j], ctx.div(ctx.dot(&svd.left_vector(j), b_tilde)?, s));
        ctx.axpy(coeff, &svd.right_vector(j), &mut y);
    }
    Ok(y)
}

/// Summary of |a_i − b_i| over indices where both are defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
    pub undefined: usize,
}

pub fn difference_stats(a: &FilterSet, b: &FilterSet) -> Result<DifferenceStats> {
    check_len(a.len(), b.len())?;
    let diffs: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (x - y).abs())
        .collect();
    let undefined = a.len() - diffs.len();
    if diffs.is_empty() {
        return Ok(DifferenceStats {
            mean: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
            std: f64::NAN,
            undefined,
        });
    }
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    Ok(DifferenceStats {
        mean,
        min: diffs.iter().copied().fold(f64::INFINITY, f64::min),
        max: diffs.iter().copied().fold(0.0, f64::max),
        std: var.sqrt(),
        undefined,
    })
}

/// Rows are iterations, columns factor indices; undefined entries are empty.
pub fn trajectory_csv(sets: &[FilterSet]) -> String {
    let width = sets.first().map_or(0, FilterSet::len);
    let mut s = String::from("k");
    for i in 0..width {
        let _ = write!(s, ",f{}", i + 1);
    }
    s.push('\n');
    for set in sets {
        let _ = write!(s, "{}", set.k);
        for v in &set.values {
            if v.is_finite() {
                let _ = write!(s, ",{v:e}");
            } else {
                s.push(',');
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{jacobi_svd, BidiagonalMatrix};
    use proptest::prelude::*;

    #[test]
    fn landweber_examples() {
        let f = landweber_filters(&[1.0, 0.0, 0.5], 2).unwrap();
        assert_eq!(f.values, vec![1.0, 0.0, 0.4375]);
        assert!(landweber_filters(&[1.5], 1).is_err());
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(stationary_pit_filters(&[1.0], 1.0, 1).values, vec![0.5]);
        assert_eq!(stationary_pit_filters(&[1.0], 1.0, 3).values, vec![0.875]);
        assert!((stationary_pit_filters(&[0.3], 1e-9, 1).values[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonstationary_base_case_and_zero_sigma() {
        let ctx = PrecisionContext::fp64();
        let t = nonstationary_pit_filters(&[2.0, 0.0], &[1.5, 0.2, 3.0], &ctx);
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].values[0], 4.0 / (4.0 + 2.25));
        assert!(t.iter().all(|s| s.values[1] == 0.0));
    }

    #[test]
    fn effective_of_inverse_and_zero() {
        let ctx = PrecisionContext::fp64();
        let b = BidiagonalMatrix::new(vec![1.0, 0.8, 0.6], vec![0.5, 0.4, 0.3]).unwrap();
        let svd = jacobi_svd(&b, &ctx).unwrap();
        let bt = [1.0, -0.5, 0.25, 0.1];
        let ones = FilterSet::defined(FilterKind::NonstationaryPit, 1, vec![1.0; 3]);
        let y = filtered_synthesis(&svd, &ones, &bt, &ctx).unwrap();
        // unfiltered synthesis is the least-squares solution
        let grad = b.apply_transpose(&b.residual(&bt, &y, &ctx).unwrap(), &ctx).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-14));
        let w = effective_filters(&y, &svd, &bt, 1, &ctx).unwrap();
        assert!(w.values.iter().all(|v| (v - 1.0).abs() < 1e-13));
        let zero = effective_filters(&[0.0; 3], &svd, &bt, 1, &ctx).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let none = FilterSet::defined(FilterKind::NonstationaryPit, 1, vec![0.0; 3]);
        assert_eq!(filtered_synthesis(&svd, &none, &bt, &ctx).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn undefined_factors_are_counted() {
        let ctx = PrecisionContext::fp64();
        let b = BidiagonalMatrix::new(vec![2.0, 1.0], vec![0.0, 0.0]).unwrap();
        let svd = jacobi_svd(&b, &ctx).unwrap();
        let w = effective_filters(&[1.0, 1.0], &svd, &[1.0, 0.0, 0.0], 1, &ctx).unwrap();
        assert_eq!(w.undefined, vec![1]);
        let s = difference_stats(&w, &FilterSet::defined(FilterKind::NonstationaryPit, 1, vec![1.0, 1.0])).unwrap();
        assert_eq!(s.undefined, 1);
        assert_eq!(s.mean, 1.0);
    }

    #[test]
    fn csv_layout() {
        let sets = vec![
            FilterSet::defined(FilterKind::Landweber, 1, vec![0.5, 0.25]),
            FilterSet {
                kind: FilterKind::Effective,
                k: 2,
                values: vec![1.0, f64::NAN],
                undefined: vec![1],
            },
        ];
        assert_eq!(trajectory_csv(&sets), "k,f1,f2\n1,5e-1,2.5e-1\n2,1e0,\n");
    }

    proptest! {
        #[test]
        fn theoretical_factors_in_unit_interval(
            sigma in prop::collection::vec(0.0f64..1.0, 1..20),
            alphas in prop::collection::vec(1e-3f64..10.0, 1..15),
        ) {
            let ctx = PrecisionContext::fp64();
            let traj = nonstationary_pit_filters(&sigma, &alphas, &ctx);
            for w in traj.windows(2) {
                for (a, b) in w[0].values.iter().zip(&w[1].values) {
                    prop_assert!(b >= a);
                }
            }
            for set in &traj {
                prop_assert!(set.values.iter().all(|v| (0.0..=1.0).contains(v)));
            }
            let k = alphas.len();
            let st = stationary_pit_filters(&sigma, alphas[0], k);
            prop_assert!(st.values.iter().all(|v| (0.0..=1.0).contains(v)));
            let lw = landweber_filters(&sigma, k).unwrap();
            prop_assert!(lw.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn stationary_ordered_in_sigma(
            mut sigma in prop::collection::vec(0.0f64..5.0, 2..20),
            alpha in 1e-2f64..10.0,
            k in 1usize..30,
        ) {
            sigma.sort_by(f64::total_cmp);
            let f = stationary_pit_filters(&sigma, alpha, k);
            prop_assert!(f.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn pit_dominates_landweber_where_claimed(
            sigma in 0.01f64..0.99,
            k in 1usize..30,
        ) {
            // α²/(σ² + α²) < 1 − σ² exactly when α² < 1 − σ²
            let alpha = (1.0 - sigma * sigma).sqrt() * 0.99;
            let pit_rest = (alpha * alpha / (sigma * sigma + alpha * alpha)).powi(k as i32);
            let lw_rest = (1.0 - sigma * sigma).powi(k as i32);
            prop_assert!(pit_rest < lw_rest);
            let pit = stationary_pit_filters(&[sigma], alpha, k).values[0];
            let lw = landweber_filters(&[sigma], k).unwrap().values[0];
            prop_assert!(pit >= lw);
        }
    }
}
