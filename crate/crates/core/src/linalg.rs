//! Tridiagonal and cyclic tridiagonal direct solves.

use crate::error::{Error, Result};

/// Solve `sub[i]·x[i-1] + diag[i]·x[i] + sup[i]·x[i+1] = rhs[i]` with the
/// Thomas algorithm. `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::SolverFailure("dimension mismatch".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::SolverFailure("zero pivot at row 0".into()));
    }
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SolverFailure(format!("zero pivot at row {i}")));
        }
        c[i] = sup[i] / beta;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Cyclic tridiagonal solve (corner entries `sub[0]` couples row 0 to
/// `x[n-1]`, `sup[n-1]` couples row n-1 to `x[0]`) via Sherman–Morrison.
pub fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::SolverFailure("cyclic system needs n >= 3".into()));
    }
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut dmod = diag.to_vec();
    dmod[0] -= gamma;
    dmod[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &dmod, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &dmod, sup, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

/// Residual `max |A x - rhs|` of a (cyclic when `cyclic`) tridiagonal system.
pub fn tridiagonal_residual(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64], rhs: &[f64], cyclic: bool) -> f64 {
    let n = diag.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut r = diag[i] * x[i] - rhs[i];
        if i > 0 {
            r += sub[i] * x[i - 1];
        } else if cyclic {
            r += sub[0] * x[n - 1];
        }
        if i + 1 < n {
            r += sup[i] * x[i + 1];
        } else if cyclic {
            r += sup[n - 1] * x[0];
        }
        worst = worst.max(r.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_and_cyclic_agree_with_residual() {
        let n = 9;
        let sub: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let sup: Vec<f64> = (0..n).map(|i| -0.4 + 0.02 * i as f64).collect();
        let diag = vec![2.0; n];
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        assert!(tridiagonal_residual(&sub, &diag, &sup, &x, &rhs, false) < 1e-14);
        let x = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        assert!(tridiagonal_residual(&sub, &diag, &sup, &x, &rhs, true) < 1e-14);
    }
}
