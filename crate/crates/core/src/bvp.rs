//! Finite-difference solver for the degenerate linear equations
//! `g(y)·u'' + (h(y)-a(y))·u' + p(y)·u = r(y)` on `(0, L]` with a Dirichlet
//! value at the trap and a first-order outflow row at the truncation point.

use crate::coeffs::Coeffs;
use crate::error::{Error, Result};
use crate::num::tridiag;
use crate::scalar::Scalar;

/// Discrete solution on its (geometric) grid.
#[derive(Debug, Clone)]
pub struct OdeSolution<S> {
    pub ys: Vec<S>,
    pub us: Vec<S>,
}

impl<S: Scalar> OdeSolution<S> {
    /// Linear interpolation; the grid resolves the near-zero region, so this
    /// is safe for `y` down to the first node.
    pub fn eval(&self, y: S) -> Result<S> {
        if y < S::zero() || y > *self.ys.last().unwrap() {
            return Err(Error::Domain(format!("{y} outside the solved range")));
        }
        let idx = match self.ys.binary_search_by(|a| a.partial_cmp(&y).unwrap()) {
            Ok(i) => return Ok(self.us[i]),
            Err(i) => i,
        };
        let (x0, x1) = (self.ys[idx - 1], self.ys[idx]);
        let t = (y - x0) / (x1 - x0);
        Ok(self.us[idx - 1] * (S::one() - t) + self.us[idx] * t)
    }
}

/// Geometric grid `0, ymin, ..., L` with `n` interior points.
fn make_grid<S: Scalar>(l: S, n: usize) -> Vec<S> {
    let ymin = S::of(1e-9) * l.min(S::one());
    let ratio = (l / ymin).powf(S::one() / S::of((n - 1) as f64));
    let mut ys = Vec::with_capacity(n + 1);
    ys.push(S::zero());
    let mut y = ymin;
    for i in 0..n {
        ys.push(if i + 1 == n { l } else { y });
        y *= ratio;
    }
    ys
}

/// Solves the equation with `u(0) = u0`. `p` and `r` are the zeroth-order
/// coefficient and the right-hand side; the row at `L` drops the diffusion
/// term, which is valid when transport dominates at the truncation point.
pub fn solve<S, P, R>(coeffs: &Coeffs<S>, l: S, n: usize, u0: S, p: P, r: R) -> Result<OdeSolution<S>>
where
    S: Scalar,
    P: Fn(S) -> S,
    R: Fn(S) -> S,
{
    let ys = make_grid(l, n);
    let m = ys.len();
    let mut sub = vec![S::zero(); m];
    let mut diag = vec![S::zero(); m];
    let mut sup = vec![S::zero(); m];
    let mut rhs = vec![S::zero(); m];

    diag[0] = S::one();
    rhs[0] = u0;

    for i in 1..m - 1 {
        let y = ys[i];
        let (a, h, g) = coeffs.eval(y)?;
        let b = h - a;
        let hm = ys[i] - ys[i - 1];
        let hp = ys[i + 1] - ys[i];
        let denom = hm + hp;
        // Non-uniform central differences.
        let (d2m, d2c, d2p) = (
            S::of(2.0) / (hm * denom),
            -S::of(2.0) / (hm * hp),
            S::of(2.0) / (hp * denom),
        );
        let (d1m, d1c, d1p) = (
            -hp / (hm * denom),
            (hp - hm) / (hm * hp),
            hm / (hp * denom),
        );
        sub[i] = g * d2m + b * d1m;
        diag[i] = g * d2c + b * d1c + p(y);
        sup[i] = g * d2p + b * d1p;
        rhs[i] = r(y);
    }

    let yl = ys[m - 1];
    let (a, h, _) = coeffs.eval(yl)?;
    let b = h - a;
    let hl = ys[m - 1] - ys[m - 2];
    sub[m - 1] = -b / hl;
    diag[m - 1] = b / hl + p(yl);
    rhs[m - 1] = r(yl);

    let us = tridiag::solve(&sub, &diag, &sup, &rhs)?;
    if us.iter().any(|u| !u.is_finite()) {
        return Err(Error::Numerical("non-finite values in ODE solve".into()));
    }
    Ok(OdeSolution { ys, us })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientSet;

    /// `a = h = g = y` turns the resolvent equation into
    /// `y u'' - y u' - α u = -y`; the transport-bounded solution is
    /// `u(y) = y/(1+α)`, which the scheme reproduces to rounding.
    #[test]
    fn linear_resolvent_solution_is_exact() {
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 0.0, 0.0, 1.0)
            .with_domain_cap(40.0)
            .build()
            .unwrap();
        let alpha = 0.7;
        let sol = solve(&c, 40.0, 2000, 0.0, |_| -alpha, |y| -c.a(y)).unwrap();
        for (y, u) in sol.ys.iter().zip(&sol.us).skip(1).take(1500) {
            assert!(
                (u - y / (1.0 + alpha)).abs() < 1e-7 * y.max(1e-6),
                "y={y} u={u}"
            );
        }
    }

    #[test]
    fn eval_interpolates_between_nodes() {
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 0.0, 0.0, 1.0)
            .with_domain_cap(10.0)
            .build()
            .unwrap();
        let sol = solve(&c, 10.0, 500, 0.0, |_| -1.0, |y| -c.a(y)).unwrap();
        let v = sol.eval(1.2345).unwrap();
        assert!((v - 1.2345 / 2.0).abs() < 1e-4);
        assert!(sol.eval(11.0).is_err());
    }
}
