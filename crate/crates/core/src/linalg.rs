//! Small dense symmetric solvers: Cholesky with ridge jitter (normal
//! equations) and a cyclic Jacobi eigensolver (exact quantum partition
//! functions at tiny sizes).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


/// Solve A x = b for symmetric positive-definite A (row-major n×n).
/// Returns None if a non-positive pivot is met.
pub(crate) fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // forward substitution L z = b
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    // back substitution L^T x = z
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Solve the (possibly rank-deficient) normal equations, escalating a ridge
/// jitter on the diagonal until Cholesky succeeds.  Returns the solution and
/// whether jitter was needed.
pub(crate) fn solve_normal_equations(a: &[f64], n: usize, b: &[f64]) -> (Vec<f64>, bool) {
    if n == 0 {
        return (Vec::new(), false);
    }
    if let Some(x) = cholesky_solve(a, n, b) {
        return (x, false);
    }
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0f64, f64::max).max(1.0);
    let mut jitter = 1e-10 * scale;
    for _ in 0..8 {
        let mut aj = a.to_vec();
        for i in 0..n {
            aj[i * n + i] += jitter;
        }
        if let Some(x) = cholesky_solve(&aj, n, b) {
            return (x, true);
        }
        jitter *= 100.0;
    }
    // pathological input; return the zero solution rather than panicking
    (vec![0.0; n], true)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    if n == 1 {
        return vec![a[0]];
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() < 1e-13 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
