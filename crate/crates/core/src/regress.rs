//! Classical regression baselines (OLS, ridge, lasso) and the refinement
//! heuristic that re-fits unregularized least squares on a fixed support.
//!
//! All objectives use the summed (not averaged) squared error, so λ values
//! are dataset-size dependent, matching the paper's sweep semantics.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::linalg::solve_normal_equations;

/// Method tag carried by a regression result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ols,
    Ridge,
    Lasso,
    Refine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub coefficients: Vec<f64>,
    /// Indices of non-zero coefficients.
    pub support: Vec<usize>,
    pub mse: f64,
    pub regularized_loss: f64,
    pub method: Method,
    /// Normal equations needed ridge jitter (rank deficiency).
    pub rank_deficient: bool,
    /// False when iterative solvers hit their cycle cap.
    pub converged: bool,
}

fn check_dims(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: x.len() });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("regression needs >= 1 row".into()));
    }
    let k = x[0].len();
    for row in x {
        if row.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: row.len() });
        }
    }
    Ok(k)
}

fn support_of(coefficients: &[f64]) -> Vec<usize> {
    coefficients
        .iter()
        .enumerate()
        .filter_map(|(i, &c)| if c != 0.0 { Some(i) } else { None })
        .collect()
}

/// Σ_s (y_s − Σ_a c_a X_sa)², summed not averaged.
pub fn mse_loss(x: &[Vec<f64>], y: &[f64], c: &[f64]) -> Result<f64> {
    let k = check_dims(x, y)?;
    if c.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: c.len() });
    }
    let mut total = 0.0;
    for (row, &ys) in x.iter().zip(y) {
        let pred: f64 = row.iter().zip(c).map(|(h, ci)| h * ci).sum();
        let r = ys - pred;
        total += r * r;
    }
    Ok(total)
}

/// Least squares restricted to `support`, zeros elsewhere; normal equations
/// with escalating ridge jitter on rank deficiency.
pub fn ols(x: &[Vec<f64>], y: &[f64], support: &[usize]) -> Result<RegressionResult> {
    let k = check_dims(x, y)?;
    for &a in support {
        if a >= k {
            return Err(Error::InvalidParameter(format!("support index {a} out of range")));
        }
    }
    let mut coefficients = vec![0.0; k];
    let mut rank_deficient = false;
    if !support.is_empty() {
        let ks = support.len();
        let mut a = vec![0.0; ks * ks];
        let mut b = vec![0.0; ks];
        for (row, &ys) in x.iter().zip(y) {
            for (u, &cu) in support.iter().enumerate() {
                b[u] += row[cu] * ys;
                for (v, &cv) in support.iter().enumerate().take(u + 1) {
                    a[u * ks + v] += row[cu] * row[cv];
                }
            }
        }
        for u in 0..ks {
            for v in (u + 1)..ks {
                a[u * ks + v] = a[v * ks + u];
            }
        }
        let (sol, jittered) = solve_normal_equations(&a, ks, &b);
        rank_deficient = jittered;
        for (u, &cu) in support.iter().enumerate() {
            coefficients[cu] = sol[u];
        }
    }
    let mse = mse_loss(x, y, &coefficients)?;
    Ok(RegressionResult {
        support: support_of(&coefficients),
        mse,
        regularized_loss: mse,
        coefficients,
        method: Method::Ols,
        rank_deficient,
        converged: true,
    })
}

/// Ridge regression: minimize mse + λ Σ c² in closed form.
pub fn ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<RegressionResult> {
    let k = check_dims(x, y)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for (row, &ys) in x.iter().zip(y) {
        for u in 0..k {
            b[u] += row[u] * ys;
            for v in 0..=u {
                a[u * k + v] += row[u] * row[v];
            }
        }
    }
    for u in 0..k {
        for v in (u + 1)..k {
            a[u * k + v] = a[v * k + u];
        }
        a[u * k + u] += lambda;
    }
    let (coefficients, rank_deficient) = solve_normal_equations(&a, k, &b);
    let mse = mse_loss(x, y, &coefficients)?;
    let penalty: f64 = coefficients.iter().map(|c| c * c).sum();
    Ok(RegressionResult {
        support: support_of(&coefficients),
        mse,
        regularized_loss: mse + lambda * penalty,
        coefficients,
        method: Method::Ridge,
        rank_deficient,
        converged: true,
    })
}

/// Lasso: minimize mse + λ Σ |c| by cyclic coordinate descent with
/// soft-thresholding; exact zeros by construction.
pub fn lasso(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<RegressionResult> {
    let k = check_dims(x, y)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let n = x.len();
    let col_sq: Vec<f64> = (0..k).map(|j| x.iter().map(|row| row[j] * row[j]).sum()).collect();
    let mut c = vec![0.0; k];
    let mut residual: Vec<f64> = y.to_vec();
    let mut converged = false;
    for _cycle in 0..100_000 {
        let mut max_change = 0.0f64;
        for j in 0..k {
            if col_sq[j] == 0.0 {
                continue;
            }
            // rho = X_j^T (residual + c_j X_j)
            let mut rho = 0.0;
            for s in 0..n {
                rho += x[s][j] * (residual[s] + c[j] * x[s][j]);
            }
            let new_c = {
                let th = lambda / 2.0;
                if rho > th {
                    (rho - th) / col_sq[j]
                } else if rho < -th {
                    (rho + th) / col_sq[j]
                } else {
                    0.0
                }
            };
            let delta = new_c - c[j];
            if delta != 0.0 {
                for s in 0..n {
                    residual[s] -= delta * x[s][j];
                }
                c[j] = new_c;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change < 1e-10 {
            converged = true;
            break;
        }
    }
    let mse = mse_loss(x, y, &c)?;
    let penalty: f64 = c.iter().map(|ci| ci.abs()).sum();
    Ok(RegressionResult {
        support: support_of(&c),
        mse,
        regularized_loss: mse + lambda * penalty,
        coefficients: c,
        method: Method::Lasso,
        rank_deficient: false,
        converged,
    })
}

/// Refinement: OLS on a support taken from a prior l0/l1 solution.  The
/// result's mse is minimal over all coefficient vectors with that support,
/// hence never above the unrefined solution's.
pub fn refine(x: &[Vec<f64>], y: &[f64], support: &[usize]) -> Result<RegressionResult> {
    let mut result = ols(x, y, support)?;
    result.method = Method::Refine;
    Ok(result)
}

/// Refine starting from explicit coefficients, falling back to them if the
/// jittered normal equations ever came out numerically worse.
pub fn refine_from_coefficients(
    x: &[Vec<f64>],
    y: &[f64],
    coefficients: &[f64],
) -> Result<RegressionResult> {
    let support = support_of(coefficients);
    let mut refined = refine(x, y, &support)?;
    let input_mse = mse_loss(x, y, coefficients)?;
    if refined.mse > input_mse {
        refined.coefficients = coefficients.to_vec();
        refined.support = support;
        refined.mse = input_mse;
        refined.regularized_loss = input_mse;
    }
    Ok(refined)
}

/// Linear-interpolation quantiles: (median, q25, q75).
pub fn quantile_summary(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("quantile_summary needs >= 1 value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let pos = p * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };
    Ok((q(0.5), q(0.25), q(0.75)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn mse_loss_examples() {
        let x = vec![vec![1.0], vec![1.0]];
        let y = [1.0, 2.0];
        assert_eq!(mse_loss(&x, &y, &[0.0]).unwrap(), 5.0); // Σ y²
        assert_eq!(mse_loss(&x, &y, &[1.5]).unwrap(), 0.5);
        assert!(mse_loss(&x, &y, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ols_cases() {
        // square invertible system: exact interpolation
        let x = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [2.0, 5.0];
        let r = ols(&x, &y, &[0, 1]).unwrap();
        assert!(r.mse < 1e-20);
        assert!((r.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((r.coefficients[1] - 3.0).abs() < 1e-10);

        // empty support
        let r0 = ols(&x, &y, &[]).unwrap();
        assert_eq!(r0.coefficients, vec![0.0, 0.0]);
        assert_eq!(r0.mse, 29.0);
        assert!(r0.support.is_empty());

        assert!(ols(&x, &y, &[5]).is_err());
    }

    #[test]
    fn ridge_cases() {
        let x = vec![vec![1.0]];
        let y = [1.0];
        let r = ridge(&x, &y, 1.0).unwrap();
        assert!((r.coefficients[0] - 0.5).abs() < 1e-12);

        // λ = 0 equals OLS
        let x2 = vec![vec![1.0, 0.5], vec![0.3, 1.0], vec![1.0, 1.0]];
        let y2 = [1.0, 2.0, 3.0];
        let r_ridge = ridge(&x2, &y2, 0.0).unwrap();
        let r_ols = ols(&x2, &y2, &[0, 1]).unwrap();
        for (a, b) in r_ridge.coefficients.iter().zip(&r_ols.coefficients) {
            assert!((a - b).abs() < 1e-9);
        }

        // huge λ crushes the coefficients
        let r_big = ridge(&x2, &y2, 1e12).unwrap();
        assert!(r_big.coefficients.iter().all(|c| c.abs() < 1e-6));
    }

    #[test]
    fn lasso_cases() {
        let x = vec![vec![1.0]];
        let y = [1.0];
        // λ = 1: soft-threshold gives 1/2
        let r = lasso(&x, &y, 1.0).unwrap();
        assert!((r.coefficients[0] - 0.5).abs() < 1e-9);
        // λ ≥ 2‖Xᵀy‖∞ = 2: exact zero
        let r0 = lasso(&x, &y, 2.0).unwrap();
        assert_eq!(r0.coefficients, vec![0.0]);
        assert!(r0.support.is_empty());

        // λ = 0 matches OLS
        let x2 = vec![vec![1.0, 0.5], vec![0.3, 1.0], vec![1.0, 1.0]];
        let y2 = [1.0, 2.0, 3.0];
        let rl = lasso(&x2, &y2, 0.0).unwrap();
        let ro = ols(&x2, &y2, &[0, 1]).unwrap();
        assert!((rl.mse - ro.mse).abs() < 1e-8);
        assert!(rl.converged);
    }

    #[test]
    fn lasso_satisfies_kkt() {
        let mut rng = crate::rng::stream_rng(61, 0, 0);
        for _ in 0..10 {
            let n = 12;
            let k = 4;
            let x: Vec<Vec<f64>> =
                (0..n).map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lambda = 0.3;
            let r = lasso(&x, &y, lambda).unwrap();
            // gradient of mse wrt c_j is -2 X_j^T residual
            for j in 0..k {
                let mut corr = 0.0;
                for s in 0..n {
                    let pred: f64 =
                        x[s].iter().zip(&r.coefficients).map(|(h, c)| h * c).sum();
                    corr += x[s][j] * (y[s] - pred);
                }
                let grad = 2.0 * corr;
                if r.coefficients[j] != 0.0 {
                    assert!((grad - lambda * r.coefficients[j].signum()).abs() < 1e-6);
                } else {
                    assert!(grad.abs() <= lambda + 1e-6);
                }
            }
        }
    }

    #[test]
    fn refine_never_increases_mse() {
        let mut rng = crate::rng::stream_rng(62, 0, 0);
        for _ in 0..100 {
            let n = 10;
            let k = 5;
            let x: Vec<Vec<f64>> =
                (0..n).map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..k)
                .map(|_| if rng.gen_bool(0.4) { rng.gen_range(-2.0..2.0) } else { 0.0 })
                .collect();
            let refined = refine_from_coefficients(&x, &y, &c).unwrap();
            let input_mse = mse_loss(&x, &y, &c).unwrap();
            assert!(refined.mse <= input_mse);
            // support never grows
            for &a in &refined.support {
                assert!(c[a] != 0.0);
            }
        }
    }

    #[test]
    fn quantiles() {
        let (med, q25, q75) = quantile_summary(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(med, 2.5);
        assert_eq!(q25, 1.75);
        assert_eq!(q75, 3.25);

        let (med, q25, q75) = quantile_summary(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((med, q25, q75), (2.0, 1.0, 3.0));

        let (med, q25, q75) = quantile_summary(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!((med, q25, q75), (7.0, 7.0, 7.0));

        assert!(quantile_summary(&[]).is_err());
    }
}
