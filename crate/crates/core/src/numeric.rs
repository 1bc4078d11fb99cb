//! Small numerical kernels: bracketed scalar root finding and dense linear
//! solves for the coefficient systems (at most 8×8).

use crate::error::{ContestError, Result};

/// Absolute tolerance on the root location.
pub const ROOT_TOL: f64 = 1e-12;

/// Finds a root of `f` on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite
/// signs. Bisection keeps the bracket; a secant step through the bracket ends
/// is taken whenever it lands strictly inside the current bracket.
pub fn bracketed_root<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(ContestError::NoConvergence(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    let mut f_hi = f_hi;
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let mid = 0.5 * (lo + hi);
        // Secant only while it stays well inside; otherwise bisect.
        let x = if secant > lo + 0.05 * (hi - lo) && secant < hi - 0.05 * (hi - lo) {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(ContestError::NoConvergence(format!(
                "non-finite residual at {x}"
            )));
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        // Always also halve when the secant made little progress.
        let m = 0.5 * (lo + hi);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == f_lo.signum() {
            lo = m;
            f_lo = fm;
        } else {
            hi = m;
            f_hi = fm;
        }
    }
    if hi - lo > tol {
        return Err(ContestError::NoConvergence(format!(
            "bracket [{lo}, {hi}] did not shrink below {tol}"
        )));
    }
    Ok(0.5 * (lo + hi))
}

/// Geometric bracket search: starting from `start`, doubles the upper end
/// until the sign of `f` differs from `f(start)` or `cap` is exceeded.
pub fn expand_bracket<F>(f: &F, start: f64, cap: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let f0 = f(start);
    if !f0.is_finite() {
        return Err(ContestError::NoConvergence(format!(
            "non-finite residual at bracket start {start}"
        )));
    }
    let mut lo = start;
    let mut hi = start * 2.0;
    while hi <= cap {
        let fh = f(hi);
        if !fh.is_finite() {
            break;
        }
        if fh.signum() != f0.signum() || fh == 0.0 {
            return Ok((lo, hi));
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(ContestError::NoConvergence(format!(
        "no sign change between {start} and the overflow cap {cap}"
    )))
}

/// Solves `a · x = b` in place by Gaussian elimination with partial pivoting.
/// Rows are equilibrated by their largest entry first.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return Err(ContestError::SingularSystem);
        }
        row.iter_mut().for_each(|v| *v /= scale);
        *rhs /= scale;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(ContestError::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ContestError::SingularSystem);
    }
    Ok(x)
}

/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]`
/// are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
