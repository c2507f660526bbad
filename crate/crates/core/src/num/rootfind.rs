//! Bracketing root finders.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bisection on `[lo, hi]`; requires a sign change. Returns the midpoint of
/// the final bracket once its width falls below `tol`.
pub fn bisect<S: Scalar>(
    mut f: impl FnMut(S) -> S,
    mut lo: S,
    mut hi: S,
    tol: S,
    max_iter: usize,
) -> Result<S> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == S::zero() {
        return Ok(lo);
    }
    if fhi == S::zero() {
        return Ok(hi);
    }
    if (flo > S::zero()) == (fhi > S::zero()) {
        return Err(Error::Numerical(format!(
            "bisection bracket [{lo}, {hi}] has no sign change (f: {flo}, {fhi})"
        )));
    }
    for _ in 0..max_iter {
        let mid = S::of(0.5) * (lo + hi);
        if hi - lo < tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == S::zero() {
            return Ok(mid);
        }
        if (fmid > S::zero()) == (flo > S::zero()) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(S::of(0.5) * (lo + hi))
}

/// Expands `hi` geometrically from `lo` until `f` changes sign, then bisects.
pub fn bisect_with_expanding_bracket<S: Scalar>(
    mut f: impl FnMut(S) -> S,
    lo: S,
    mut hi: S,
    tol: S,
) -> Result<S> {
    let flo = f(lo);
    let mut fhi = f(hi);
    let mut expansions = 0;
    while (flo > S::zero()) == (fhi > S::zero()) {
        hi = hi + hi;
        fhi = f(hi);
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Numerical(
                "failed to bracket a root while expanding upward".into(),
            ));
        }
    }
    bisect(f, lo, hi, tol, 200)
}
