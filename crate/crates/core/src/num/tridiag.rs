//! Thomas algorithm for tridiagonal linear systems.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves a tridiagonal system in place. `sub[i]` multiplies `x[i-1]` in
/// row `i` (with `sub[0]` unused), `diag[i]` multiplies `x[i]`, and
/// `sup[i]` multiplies `x[i+1]` (with `sup[n-1]` unused).
pub fn solve<S: Scalar>(sub: &[S], diag: &[S], sup: &[S], rhs: &[S]) -> Result<Vec<S>> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![S::zero(); n];
    let mut d = vec![S::zero(); n];

    let mut denom = diag[0];
    if denom == S::zero() {
        return Err(Error::Numerical("singular tridiagonal system".into()));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == S::zero() {
            return Err(Error::Numerical("singular tridiagonal system".into()));
        }
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c[i] * next;
    }
    Ok(x)
}
