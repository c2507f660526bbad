//! Scale-function machinery for the one-dimensional diffusion
//! `dY = (-a(Y)+h(Y)) dt + sqrt(2 g(Y)) dB` absorbed at zero, plus the
//! analysis operations built on it: hitting probabilities, the extinction
//! functional, occupation (Green) integrals, excursion-measure functionals,
//! the Malthusian exponent and the extinction fixed point.
//!
//! The scale density is `s(z) = exp(-I(z))` with `I(z)` the integral of
//! `(h-a)/g` from 0 to `z`; the table keeps `I` and `ln S` on a geometric
//! grid and continues within segments by a single Gauss-Kronrod panel, so
//! pointwise queries are accurate to near machine precision while bulk
//! simulation queries go through O(1) interpolated lookups.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bvp;
use crate::coeffs::{AssumptionReport, Coeffs, Witnesses};
use crate::error::{Error, Result};
use crate::num::quad::{gk15, integrate, integrate_semi_infinite, integrate_to_zero};
use crate::num::rootfind::bisect;
use crate::scalar::Scalar;

/// Tuning for the tabulation grid.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec<S> {
    /// Number of geometric grid points between `y_min` and the domain cap.
    pub points: usize,
    /// `y_min = y_min_factor * domain_cap`.
    pub y_min_factor: S,
    /// Quadrature tolerance used by the table and the analysis integrals.
    pub tol: S,
}

impl<S: Scalar> Default for GridSpec<S> {
    fn default() -> Self {
        Self {
            points: 1600,
            y_min_factor: S::of(1e-10),
            tol: S::of(1e-10),
        }
    }
}

/// Tabulated scale machinery for one coefficient set.
///
/// Internally everything is kept in the normalization `s(0) = 1`; the
/// `factor` only affects the raw `s`/`S` accessors so that observable
/// quantities are invariant under rescaling the scale function.
#[derive(Debug)]
pub struct ScaleTable<S> {
    coeffs: Coeffs<S>,
    tol: S,
    /// `grid[0] = 0`, then geometric from `ymin` to the cap.
    grid: Vec<S>,
    /// `expo[i]` = integral of `(h-a)/g` from 0 to `grid[i]`.
    expo: Vec<S>,
    /// `ln_big_s[i] = ln S(grid[i])` in the `s(0)=1` normalization
    /// (`ln_big_s[0] = -inf`).
    ln_big_s: Vec<S>,
    ln_factor: S,
    ln_ymin: S,
    dln: S,
    theta_cache: OnceLock<(S, S)>,
}

impl<S: Scalar> Clone for ScaleTable<S> {
    fn clone(&self) -> Self {
        Self {
            coeffs: self.coeffs.clone(),
            tol: self.tol,
            grid: self.grid.clone(),
            expo: self.expo.clone(),
            ln_big_s: self.ln_big_s.clone(),
            ln_factor: self.ln_factor,
            ln_ymin: self.ln_ymin,
            dln: self.dln,
            theta_cache: OnceLock::new(),
        }
    }
}

fn logaddexp<S: Scalar>(a: S, b: S) -> S {
    if a == S::neg_infinity() {
        return b;
    }
    if b == S::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Builds the table. Fails with a precondition error when the scale density
/// has no limit at zero (the near-zero exponent integral diverges).
pub fn build_scale_table<S: Scalar>(coeffs: &Coeffs<S>, spec: GridSpec<S>) -> Result<ScaleTable<S>> {
    let cap = coeffs.domain_cap();
    let phi = |y: S| coeffs.drift_over_g(y);
    let ymin = spec.y_min_factor * cap;
    let n = spec.points.max(64);

    let head = integrate_to_zero(&phi, ymin, spec.tol);
    if head.diverged || !head.value.is_finite() {
        return Err(Error::Precondition(
            "scale density has no finite limit at zero".into(),
        ));
    }

    let ratio = (cap / ymin).powf(S::one() / S::of((n - 1) as f64));
    let mut grid = Vec::with_capacity(n + 1);
    grid.push(S::zero());
    let mut y = ymin;
    for i in 0..n {
        grid.push(if i + 1 == n { cap } else { y });
        y *= ratio;
    }

    let mut expo = vec![S::zero(); n + 1];
    expo[1] = head.value;
    for i in 1..n {
        expo[i + 1] = expo[i] + gk15(&phi, grid[i], grid[i + 1]).value;
    }

    // ln S by per-segment panels with log-sum accumulation; within a segment
    // the exponent is continued from the left checkpoint by one more panel.
    let mut ln_big_s = vec![S::neg_infinity(); n + 1];
    for i in 0..n {
        let (lo, hi) = (grid[i], grid[i + 1]);
        let base = expo[i];
        let shift = expo[i].min(expo[i + 1]);
        let seg = gk15(
            |t: S| (-(base + gk15(&phi, lo, t).value) + shift).exp(),
            lo,
            hi,
        )
        .value;
        let ln_seg = if seg > S::zero() {
            seg.ln() - shift
        } else {
            S::neg_infinity()
        };
        ln_big_s[i + 1] = logaddexp(ln_big_s[i], ln_seg);
    }

    Ok(ScaleTable {
        coeffs: coeffs.clone(),
        tol: spec.tol,
        ln_ymin: grid[1].ln(),
        dln: (grid[2] / grid[1]).ln(),
        grid,
        expo,
        ln_big_s,
        ln_factor: S::zero(),
        theta_cache: OnceLock::new(),
    })
}

impl<S: Scalar> ScaleTable<S> {
    pub fn coeffs(&self) -> &Coeffs<S> {
        &self.coeffs
    }

    pub fn domain_cap(&self) -> S {
        self.coeffs.domain_cap()
    }

    pub fn tol(&self) -> S {
        self.tol
    }

    /// Variant of the table with the scale function multiplied by `c`;
    /// observable quantities are invariant under this.
    #[doc(hidden)]
    pub fn rescaled(&self, c: S) -> Self {
        let mut t = self.clone();
        t.ln_factor = self.ln_factor + c.ln();
        t
    }

    fn segment(&self, y: S) -> usize {
        // Largest i with grid[i] <= y; y must be in [0, cap].
        match self
            .grid
            .binary_search_by(|a| a.partial_cmp(&y).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    fn check_domain(&self, y: S) -> Result<()> {
        if y < S::zero() || y > self.domain_cap() || y.is_nan() {
            return Err(Error::Domain(format!(
                "state {y} outside [0, {}]",
                self.domain_cap()
            )));
        }
        Ok(())
    }

    /// Exponent integral from 0 to `y`, continued exactly inside a segment.
    fn expo_at(&self, y: S) -> S {
        debug_assert!(y >= S::zero() && y <= self.domain_cap());
        let i = self.segment(y).min(self.grid.len() - 2);
        if y == self.grid[i] {
            return self.expo[i];
        }
        self.expo[i] + gk15(|t: S| self.coeffs.drift_over_g(t), self.grid[i], y).value
    }

    /// Exponent integral continued beyond the cap when needed by tail
    /// integrals.
    fn expo_any(&self, y: S) -> S {
        let cap = self.domain_cap();
        if y <= cap {
            self.expo_at(y)
        } else {
            *self.expo.last().unwrap()
                + integrate(|t: S| self.coeffs.drift_over_g(t), cap, y, self.tol).value
        }
    }

    /// `ln S(y)` in the `s(0)=1` normalization.
    fn ln_big_s_at(&self, y: S) -> S {
        if y <= S::zero() {
            return S::neg_infinity();
        }
        let i = self.segment(y).min(self.grid.len() - 2);
        if y == self.grid[i] {
            return self.ln_big_s[i];
        }
        let lo = self.grid[i];
        let base = self.expo[i];
        let shift = base;
        let phi = |t: S| self.coeffs.drift_over_g(t);
        let seg = gk15(
            |t: S| (-(base + gk15(&phi, lo, t).value) + shift).exp(),
            lo,
            y,
        )
        .value;
        let ln_seg = if seg > S::zero() {
            seg.ln() - shift
        } else {
            S::neg_infinity()
        };
        logaddexp(self.ln_big_s[i], ln_seg)
    }

    /// Scale density `s(y)`.
    pub fn s(&self, y: S) -> Result<S> {
        self.check_domain(y)?;
        Ok((-self.expo_at(y) + self.ln_factor).exp())
    }

    /// Scale function `S(y)` (integral of `s` from 0).
    pub fn big_s(&self, y: S) -> Result<S> {
        self.check_domain(y)?;
        Ok((self.ln_big_s_at(y) + self.ln_factor).exp())
    }

    /// Speed density `1/(g(y) s(y))` in the `s(0)=1` normalization.
    pub fn speed(&self, y: S) -> Result<S> {
        self.check_domain(y)?;
        if y == S::zero() {
            return Err(Error::Domain("speed density undefined at the trap".into()));
        }
        Ok(self.expo_at(y).exp() / self.coeffs.g(y))
    }

    // ---- fast interpolated queries for bulk simulation ----------------

    fn fast_pair(&self, y: S) -> (S, S) {
        // (expo, ln S) by linear interpolation in ln y; below the first grid
        // point the exponent is ~0 and S(y) ~ y.
        let ymin = self.grid[1];
        if y <= ymin {
            let frac = (y / ymin).max(S::zero());
            return (
                self.expo[1] * frac,
                self.ln_big_s[1] + (frac.max(S::of(1e-300))).ln(),
            );
        }
        let cap = self.domain_cap();
        let yc = if y >= cap { cap } else { y };
        let t = (yc.ln() - self.ln_ymin) / self.dln;
        let n = self.grid.len() - 2;
        let i = (t.to_f64_lossy().floor() as usize).min(n - 1);
        let w = (t - S::of(i as f64)).max(S::zero()).min(S::one());
        let j = i + 1;
        (
            self.expo[j] * (S::one() - w) + self.expo[j + 1] * w,
            self.ln_big_s[j] * (S::one() - w) + self.ln_big_s[j + 1] * w,
        )
    }

    /// Interpolated `s(y)` in the `s(0)=1` normalization.
    pub fn s_hat_fast(&self, y: S) -> S {
        (-self.fast_pair(y).0).exp()
    }

    /// Interpolated `S(y)` in the `s(0)=1` normalization.
    pub fn big_s_hat_fast(&self, y: S) -> S {
        self.fast_pair(y).1.exp()
    }

    /// Drift of the diffusion conditioned to exit upward:
    /// `(-a+h) + 2 g s/S`. Uses interpolated lookups; suited for inner
    /// simulation loops.
    pub fn up_drift_fast(&self, y: S) -> S {
        let (a, h, g) = match self.coeffs.eval(y) {
            Ok(t) => t,
            Err(_) => return S::nan(),
        };
        let (e, ls) = self.fast_pair(y);
        (h - a) + S::of(2.0) * g * (-e - ls).exp()
    }

    // ---- analysis operations -------------------------------------------

    /// `P^y(T_b < T_c)` for `0 <= c < y < b <= cap`:
    /// `(S(y)-S(c)) / (S(b)-S(c))`, evaluated in log space.
    pub fn hitting_probability(&self, y: S, c: S, b: S) -> Result<S> {
        self.check_domain(b)?;
        if !(c >= S::zero() && c < y && y < b) {
            return Err(Error::Domain(format!(
                "need 0 <= c < y < b, got c={c}, y={y}, b={b}"
            )));
        }
        let (lc, ly, lb) = (
            self.ln_big_s_at(c),
            self.ln_big_s_at(y),
            self.ln_big_s_at(b),
        );
        let num = (ly - lb).exp() - (lc - lb).exp();
        let den = S::one() - (lc - lb).exp();
        Ok(num / den)
    }

    /// The extinction functional `theta = int_0^inf a/(g s) dy` (with
    /// `s(0)=1`), together with a quadrature error bound. Divergence is
    /// reported as `+inf`.
    pub fn theta(&self) -> (S, S) {
        *self.theta_cache.get_or_init(|| {
            let f = |z: S| {
                let (a, _, g) = match self.coeffs.eval(z) {
                    Ok(t) => t,
                    Err(_) => return S::zero(),
                };
                a / g * self.expo_any(z).exp()
            };
            let anchor = S::one().min(self.domain_cap());
            let head = integrate_to_zero(&f, anchor, self.tol);
            let tail = integrate_semi_infinite(&f, anchor, self.tol);
            if head.diverged || tail.diverged {
                (S::infinity(), S::infinity())
            } else {
                (head.value + tail.value, head.abs_err + tail.abs_err)
            }
        })
    }

    /// Expected occupation integral up to exit from `(0, b)`:
    /// `E^y int_0^{T_0 ^ T_b} f(Y_t) dt` by the Green-function formula.
    pub fn green_occupation(
        &self,
        y: S,
        b: S,
        f: &dyn Fn(S) -> S,
    ) -> Result<(S, S)> {
        self.check_domain(b)?;
        if !(y > S::zero() && y < b) {
            return Err(Error::Domain(format!("need 0 < y < b, got y={y}, b={b}")));
        }
        let (ly, lb) = (self.ln_big_s_at(y), self.ln_big_s_at(b));
        // z < y: weight (S(b)-S(y))/S(b) * S(z)/(g s).
        let w_low = S::one() - (ly - lb).exp();
        let below = integrate_to_zero(
            |z: S| {
                let g = self.coeffs.g(z);
                f(z) * (self.ln_big_s_at(z) + self.expo_at(z)).exp() / g
            },
            y,
            self.tol,
        );
        // z > y: weight S(y) * (S(b)-S(z))/S(b) / (g s).
        let above = integrate(
            |z: S| {
                let g = self.coeffs.g(z);
                let lz = self.ln_big_s_at(z);
                f(z) * (ly + self.expo_at(z)).exp() * (S::one() - (lz - lb).exp()) / g
            },
            y,
            b,
            self.tol,
        );
        if below.diverged {
            return Err(Error::Numerical("occupation integral diverged".into()));
        }
        Ok((
            w_low * below.value + above.value,
            below.abs_err + above.abs_err,
        ))
    }

    /// `w_f(x) = E^x int_0^{T_0} f(Y_t) dt = int_0^inf S(x^z) f(z)/(g s) dz`.
    pub fn w_functional(&self, x: S, f: &dyn Fn(S) -> S) -> Result<(S, S)> {
        self.check_domain(x)?;
        if x == S::zero() {
            return Ok((S::zero(), S::zero()));
        }
        let below = integrate_to_zero(
            |z: S| {
                let g = self.coeffs.g(z);
                f(z) * (self.ln_big_s_at(z) + self.expo_at(z)).exp() / g
            },
            x,
            self.tol,
        );
        let lx = self.ln_big_s_at(x);
        let above = integrate_semi_infinite(
            |z: S| {
                let g = self.coeffs.g(z);
                f(z) * (lx + self.expo_any(z)).exp() / g
            },
            x,
            self.tol,
        );
        if below.diverged || above.diverged {
            return Err(Error::Numerical(
                "occupation functional diverged; expected value is infinite".into(),
            ));
        }
        Ok((below.value + above.value, below.abs_err + above.abs_err))
    }

    /// Slope of `w_f` at the trap: `w_f'(0) = int_0^inf f/(g s) dz`.
    /// Divergence is reported as `+inf`.
    pub fn w_prime0(&self, f: &dyn Fn(S) -> S) -> (S, S) {
        let g = |z: S| f(z) * self.expo_any(z).exp() / self.coeffs.g(z);
        let anchor = S::one().min(self.domain_cap());
        let head = integrate_to_zero(&g, anchor, self.tol);
        let tail = integrate_semi_infinite(&g, anchor, self.tol);
        if head.diverged || tail.diverged {
            (S::infinity(), S::infinity())
        } else {
            (head.value + tail.value, head.abs_err + tail.abs_err)
        }
    }

    /// Expected total population-time area spawned by one founding island of
    /// mass `x`, all descendant islands included:
    /// `w_id(x) + w_id'(0) w_a(x) / (1 - theta)` below criticality, infinite
    /// otherwise.
    pub fn expected_total_area(&self, x: S) -> Result<(S, S)> {
        let (theta, terr) = self.theta();
        if !(theta < S::one()) {
            return Ok((S::infinity(), S::infinity()));
        }
        let ident = |z: S| z;
        let a_fn = |z: S| self.coeffs.a(z);
        let (wid, e1) = self.w_functional(x, &ident)?;
        let (wa, e2) = self.w_functional(x, &a_fn)?;
        let (wid0, e3) = self.w_prime0(&ident);
        let denom = S::one() - theta;
        let value = wid + wid0 * wa / denom;
        let err = e1 + (e3 * wa + wid0 * e2) / denom
            + wid0 * wa * terr / (denom * denom);
        Ok((value, err))
    }

    /// Long-run time average of the total population-time accrual at
    /// criticality: `w_id'(0) w_a(x) / int_0^inf w_a/(g s)`, and 0 when the
    /// normalizing integral diverges.
    pub fn critical_time_average(&self, x: S) -> Result<(S, S)> {
        let ident = |z: S| z;
        let a_fn = |z: S| self.coeffs.a(z);
        let (wid0, e1) = self.w_prime0(&ident);
        let (wa, e2) = self.w_functional(x, &a_fn)?;
        let inner_tol = self.tol.max(S::of(1e-9));
        let g = |z: S| {
            let w = self
                .w_functional(z.min(self.domain_cap()), &a_fn)
                .map(|t| t.0)
                .unwrap_or(S::infinity());
            w * self.expo_any(z).exp() / self.coeffs.g(z)
        };
        let anchor = S::one().min(self.domain_cap());
        let head = integrate_to_zero(&g, anchor, inner_tol);
        let tail = integrate_semi_infinite(&g, anchor, inner_tol);
        if head.diverged || tail.diverged {
            return Ok((S::zero(), S::zero()));
        }
        let d = head.value + tail.value;
        let derr = head.abs_err + tail.abs_err;
        let value = wid0 * wa / d;
        let err = (e1 * wa + wid0 * e2) / d + value * derr / d;
        Ok((value, err))
    }

    fn require_conservative(&self) -> Result<()> {
        // S(inf) = inf makes the excursion measure conservative; checked by
        // tail divergence of the scale density integral.
        let tail = integrate_semi_infinite(
            |z: S| (-self.expo_any(z)).exp(),
            S::one().min(self.domain_cap()),
            self.tol.max(S::of(1e-6)),
        );
        if tail.diverged {
            Ok(())
        } else {
            Err(Error::Precondition(
                "scale function is bounded; excursion measure is not conservative".into(),
            ))
        }
    }

    /// Excursion-measure moment of a path integral:
    /// `m = 1`: `Q[int f(chi_t) dt] = int f/(g s)`;
    /// `m = 2`: `Q[(int f(chi_t) dt)^2] = int 2 f w_f / (g s)`.
    pub fn q_functional(&self, f: &dyn Fn(S) -> S, m: u8) -> Result<(S, S)> {
        self.require_conservative()?;
        match m {
            1 => Ok(self.w_prime0(f)),
            2 => {
                let g = |z: S| {
                    let w = self
                        .w_functional(z.min(self.domain_cap()), f)
                        .map(|t| t.0)
                        .unwrap_or(S::infinity());
                    S::of(2.0) * f(z) * w * self.expo_any(z).exp() / self.coeffs.g(z)
                };
                let anchor = S::one().min(self.domain_cap());
                let head = integrate_to_zero(&g, anchor, self.tol.max(S::of(1e-9)));
                let tail = integrate_semi_infinite(&g, anchor, self.tol.max(S::of(1e-9)));
                if head.diverged || tail.diverged {
                    Ok((S::infinity(), S::infinity()))
                } else {
                    Ok((head.value + tail.value, head.abs_err + tail.abs_err))
                }
            }
            _ => Err(Error::Domain(format!("moment order {m} not supported"))),
        }
    }

    /// `Q[int t f(chi_t) dt] = int w_f/(g s)`.
    pub fn q_time_weighted(&self, f: &dyn Fn(S) -> S) -> Result<(S, S)> {
        self.require_conservative()?;
        let g = |z: S| {
            let w = self
                .w_functional(z.min(self.domain_cap()), f)
                .map(|t| t.0)
                .unwrap_or(S::infinity());
            w * self.expo_any(z).exp() / self.coeffs.g(z)
        };
        let anchor = S::one().min(self.domain_cap());
        let head = integrate_to_zero(&g, anchor, self.tol.max(S::of(1e-9)));
        let tail = integrate_semi_infinite(&g, anchor, self.tol.max(S::of(1e-9)));
        if head.diverged || tail.diverged {
            Ok((S::infinity(), S::infinity()))
        } else {
            Ok((head.value + tail.value, head.abs_err + tail.abs_err))
        }
    }

    // ---- spectral quantities via the resolvent equation ------------------

    fn ode_slope(&self, u0: S, p: impl Fn(S) -> S + Copy, r: impl Fn(S) -> S + Copy) -> Result<S> {
        let l = self.domain_cap();
        let slope_for = |n: usize| -> Result<S> {
            let sol = bvp::solve(&self.coeffs, l, n, u0, p, r)?;
            // u - u(0) ~ slope * S(y) near zero; two-point extrapolation in y
            // removes the first correction term.
            let ya = S::of(1e-4) * l.min(S::one());
            let sa = (self.ln_big_s_at(ya)).exp();
            let sb = (self.ln_big_s_at(ya + ya)).exp();
            let ka = (sol.eval(ya)? - u0) / sa;
            let kb = (sol.eval(ya + ya)? - u0) / sb;
            Ok(S::of(2.0) * ka - kb)
        };
        let coarse = slope_for(3000)?;
        let fine = slope_for(6000)?;
        Ok((S::of(4.0) * fine - coarse) / S::of(3.0))
    }

    /// `F(alpha)`: slope at zero of the bounded solution of
    /// `g u'' + (h-a) u' - alpha u = -a`, `u(0)=0`. `F(0)` recovers `theta`.
    pub fn resolvent_slope(&self, alpha: S) -> Result<S> {
        if alpha < S::zero() {
            return Err(Error::Domain("alpha must be nonnegative".into()));
        }
        self.ode_slope(S::zero(), |_| -alpha, |y| -self.coeffs.a(y))
    }

    /// The Malthusian exponent: the root of `F(alpha) = 1`. Requires a
    /// supercritical model (`theta > 1`).
    pub fn malthusian_alpha(&self) -> Result<(S, S)> {
        let (theta, _) = self.theta();
        if !(theta > S::one()) {
            return Err(Error::Precondition(format!(
                "Malthusian exponent needs theta > 1, got {theta}"
            )));
        }
        let mut hi = S::one();
        for _ in 0..80 {
            if self.resolvent_slope(hi)? < S::one() {
                break;
            }
            hi *= S::of(2.0);
        }
        let tol = S::of(1e-10) * hi.max(S::one());
        let alpha = bisect(
            |x| self.resolvent_slope(x).unwrap_or(S::nan()) - S::one(),
            S::zero(),
            hi,
            tol,
            200,
        )?;
        Ok((alpha, tol))
    }

    /// The Laplace-type fixed-point map `k(z)`: minus the slope at zero of
    /// the bounded solution of `g u'' + (h-a) u' = z a u`, `u(0)=1`.
    /// `k'(0)` recovers `theta`.
    pub fn fixed_point_map(&self, z: S) -> Result<S> {
        if z < S::zero() {
            return Err(Error::Domain("z must be nonnegative".into()));
        }
        let s = self.ode_slope(S::one(), move |y| -z * self.coeffs.a(y), |_| S::zero())?;
        Ok(-s)
    }

    /// The maximal fixed point `q` of `k`; zero at and below criticality
    /// (classification uses the dead band around `theta = 1`).
    pub fn fixed_point_q(&self) -> Result<(S, S)> {
        let (theta, terr) = self.theta();
        let regime = classify_regime(theta.to_f64_lossy(), terr.to_f64_lossy());
        if regime != Regime::Supercritical {
            return Ok((S::zero(), S::zero()));
        }
        let mut hi = S::one();
        for _ in 0..200 {
            if self.fixed_point_map(hi)? < hi {
                break;
            }
            hi *= S::of(2.0);
        }
        // Walk down for a point with k(z) > z; near zero the difference is
        // O(z) and drowns in extraction noise, so stop early and call the
        // fixed point zero if none is found.
        let mut lo = S::zero();
        let mut cand = hi * S::of(0.5);
        for _ in 0..40 {
            let d = self.fixed_point_map(cand)? - cand;
            if d > S::of(1e-7) * cand.max(S::of(1e-3)) {
                lo = cand;
                break;
            }
            cand *= S::of(0.5);
        }
        if lo == S::zero() {
            return Ok((S::zero(), S::zero()));
        }
        let tol = S::of(1e-10) * hi.max(S::one());
        let q = bisect(
            |x| self.fixed_point_map(x).unwrap_or(S::nan()) - x,
            lo,
            hi,
            tol,
            200,
        )?;
        Ok((q, tol))
    }

    /// Survival probability of the whole island system started from one
    /// island of mass `x`: `1 - u_q(x)` with `u_q` the fixed-point solution.
    pub fn survival_probability(&self, x: S) -> Result<S> {
        self.check_domain(x)?;
        let (q, _) = self.fixed_point_q()?;
        if q == S::zero() {
            return Ok(S::zero());
        }
        let sol = bvp::solve(
            &self.coeffs,
            self.domain_cap(),
            6000,
            S::one(),
            |y| -q * self.coeffs.a(y),
            |_| S::zero(),
        )?;
        Ok(S::one() - sol.eval(x)?)
    }
}

// ---------------------------------------------------------------------
// Regime classification and the analysis report.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        };
        f.write_str(s)
    }
}

/// Classifies by `theta` with a dead band around 1 sized by the quadrature
/// error.
pub fn classify_regime(theta: f64, theta_err: f64) -> Regime {
    let band = (3.0 * theta_err).max(1e-6);
    if theta > 1.0 + band {
        Regime::Supercritical
    } else if theta < 1.0 - band {
        Regime::Subcritical
    } else {
        Regime::Critical
    }
}

/// Error bounds attached to the fields of [`AnalysisReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBars {
    pub theta: f64,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
    pub expected_area: Option<f64>,
    pub critical_ratio: Option<f64>,
}

/// Full deterministic analysis of one model at a starting mass `x0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub theta: f64,
    pub regime: Regime,
    /// Malthusian growth exponent (supercritical only).
    pub alpha: Option<f64>,
    /// Maximal fixed point of the extinction map (supercritical only).
    pub q: Option<f64>,
    /// Survival probability from `x0` (supercritical only).
    pub survival: Option<f64>,
    /// Expected total population-time area from `x0` (subcritical only).
    pub expected_area: Option<f64>,
    /// Long-run time-average accrual ratio from `x0` (critical only).
    pub critical_ratio: Option<f64>,
    pub errors: ErrorBars,
}

/// Runs the assumption checks, builds the scale table and computes the
/// regime-specific quantities at `x0`.
pub fn analyze(coeffs: &Coeffs<f64>, x0: f64, spec: GridSpec<f64>) -> Result<AnalysisReport> {
    let report = validate_assumptions_impl(coeffs, spec.tol.max(1e-9))?;
    if !report.all_core_ok() {
        return Err(Error::Precondition(format!(
            "model assumptions violated: a1={} a2={} sbar={} mh={}",
            report.a1_ok, report.a2_ok, report.sbar_ok, report.mh_ok
        )));
    }
    let table = build_scale_table(coeffs, spec)?;
    let (theta, theta_err) = table.theta();
    let regime = classify_regime(theta, theta_err);

    let mut out = AnalysisReport {
        theta,
        regime,
        alpha: None,
        q: None,
        survival: None,
        expected_area: None,
        critical_ratio: None,
        errors: ErrorBars {
            theta: theta_err,
            alpha: None,
            q: None,
            expected_area: None,
            critical_ratio: None,
        },
    };
    match regime {
        Regime::Subcritical => {
            let (v, e) = table.expected_total_area(x0)?;
            out.expected_area = Some(v);
            out.errors.expected_area = Some(e);
        }
        Regime::Critical => {
            let (v, e) = table.critical_time_average(x0)?;
            out.critical_ratio = Some(v);
            out.errors.critical_ratio = Some(e);
        }
        Regime::Supercritical => {
            let (alpha, ae) = table.malthusian_alpha()?;
            let (q, qe) = table.fixed_point_q()?;
            out.alpha = Some(alpha);
            out.q = Some(q);
            out.survival = Some(table.survival_probability(x0)?);
            out.errors.alpha = Some(ae);
            out.errors.q = Some(qe);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Standing-assumption verification.
// ---------------------------------------------------------------------

/// Decade-wise convergence classification: contributions are ordered with
/// the limit direction last; non-decaying contributions or a blown-up total
/// mean divergence.
fn classify_decades<S: Scalar>(decades: &[S]) -> (S, bool) {
    let mut total = S::zero();
    for &d in decades {
        total += d;
    }
    if !total.is_finite() || total > S::of(1e12) {
        return (S::infinity(), true);
    }
    if decades.len() >= 2 {
        let last = decades[decades.len() - 1];
        let prev = decades[decades.len() - 2];
        let floor = S::of(1e-13) * (S::one() + total.abs());
        if last > floor && prev > floor && last >= S::of(0.97) * prev {
            return (S::infinity(), true);
        }
    }
    (total, false)
}

struct Probe<S> {
    ys: Vec<S>,
    /// Integral of `(h-a)/g` from 1 to `ys[i]`.
    expo: Vec<S>,
    /// `ln(Sbar/sbar)` at `ys[i]`, accumulated through neighbor differences
    /// of `expo` so that no large-magnitude cancellation occurs. `+inf` when
    /// the scale density is not integrable at zero.
    ratio_log: Vec<S>,
    per_decade: usize,
    anchor: usize,
}

impl<S: Scalar> Probe<S> {
    fn new(coeffs: &Coeffs<S>) -> Self {
        let per_decade = 16usize;
        let hull = coeffs.eval_hull().to_f64_lossy();
        let hi_decades = if coeffs.lipschitz_checked_on_grid_only() {
            hull.log10().floor().max(0.0) as usize
        } else {
            12
        };
        let lo_decades = 12usize;
        let n = (lo_decades + hi_decades) * per_decade + 1;
        let ln10 = S::of(std::f64::consts::LN_10);
        let step = ln10 / S::of(per_decade as f64);
        let start = -ln10 * S::of(lo_decades as f64);
        let ys: Vec<S> = (0..n).map(|i| (start + step * S::of(i as f64)).exp()).collect();
        let anchor = lo_decades * per_decade;

        let phi = |y: S| coeffs.drift_over_g(y);
        let mut expo = vec![S::zero(); n];
        for i in anchor..n - 1 {
            expo[i + 1] = expo[i] + gk15(&phi, ys[i], ys[i + 1]).value;
        }
        for i in (0..anchor).rev() {
            expo[i] = expo[i + 1] - gk15(&phi, ys[i], ys[i + 1]).value;
        }

        // Local power of sbar at the bottom of the grid decides whether the
        // head integral of sbar exists.
        let p = -(expo[1] - expo[0]) / (ys[1] / ys[0]).ln();
        let mut ratio_log = vec![S::infinity(); n];
        if p > S::of(-1.0 + 1e-9) && expo[0].is_finite() {
            ratio_log[0] = (ys[0] / (S::one() + p)).ln();
            for i in 0..n - 1 {
                // Segment integral of sbar, expressed relative to
                // sbar(ys[i+1]); only neighbor differences of expo enter.
                let base = expo[i];
                let lo = ys[i];
                let seg_rel = gk15(
                    |t: S| {
                        let frac = (t / lo).ln() / (ys[i + 1] / lo).ln();
                        let e = base + (expo[i + 1] - base) * frac;
                        (expo[i + 1] - e).exp()
                    },
                    lo,
                    ys[i + 1],
                )
                .value;
                let ln_seg_rel = if seg_rel > S::zero() {
                    seg_rel.ln()
                } else {
                    S::neg_infinity()
                };
                ratio_log[i + 1] = logaddexp(
                    ratio_log[i] + (expo[i + 1] - expo[i]),
                    ln_seg_rel,
                );
            }
        }
        Probe {
            ys,
            expo,
            ratio_log,
            per_decade,
            anchor,
        }
    }

    /// Trapezoid contributions of `f` per segment, grouped per decade over
    /// `[lo, hi)` grid indices, ordered in the direction of `toward_zero`.
    fn decades(&self, lo: usize, hi: usize, toward_zero: bool, f: impl Fn(usize) -> S) -> Vec<S> {
        let vals: Vec<S> = (lo..=hi).map(f).collect();
        let mut segs: Vec<S> = (lo..hi)
            .map(|i| {
                let a = vals[i - lo];
                let b = vals[i + 1 - lo];
                let width = self.ys[i + 1] - self.ys[i];
                if a.is_finite() && b.is_finite() {
                    (a + b) * width * S::of(0.5)
                } else {
                    S::infinity()
                }
            })
            .collect();
        if toward_zero {
            segs.reverse();
        }
        segs.chunks(self.per_decade)
            .map(|c| c.iter().copied().sum())
            .collect()
    }
}

pub(crate) fn validate_assumptions_impl<S: Scalar>(
    coeffs: &Coeffs<S>,
    tol: S,
) -> Result<AssumptionReport> {
    // (A1): linearity band of a, positivity of g off zero.
    let (c1, c2) = coeffs.linear_bounds();
    let hull = coeffs.eval_hull();
    let mut a1_ok = c1 > S::zero() && c2 >= c1;
    let mut amin = S::infinity();
    let mut amax = S::neg_infinity();
    for i in 1..=200 {
        let y = hull * S::of(i as f64 / 200.0);
        match coeffs.eval(y) {
            Ok((a, _, g)) => {
                let r = a / y;
                amin = amin.min(r);
                amax = amax.max(r);
                let slack = S::of(1e-9) * a.abs().max(S::one());
                if a + slack < c1 * y || a - slack > c2 * y || !(g > S::zero()) {
                    a1_ok = false;
                }
            }
            Err(_) => a1_ok = false,
        }
    }

    let probe = Probe::new(coeffs);
    let n = probe.ys.len();
    let anchor = probe.anchor;

    // sbar: does the exponent integral have a limit at zero?
    let sbar_probe = integrate_to_zero(|y: S| coeffs.drift_over_g(y), S::one(), tol);
    let sbar_ok = !sbar_probe.diverged && sbar_probe.value.is_finite();

    // (A2): int_0 Sbar/(g sbar) near zero.
    let a2_f = |i: usize| {
        let y = probe.ys[i];
        let v = probe.ratio_log[i].exp() / coeffs.g(y);
        if v.is_nan() { S::infinity() } else { v }
    };
    let a2_dec = probe.decades(0, anchor, true, a2_f);
    let (a2_total, a2_div) = classify_decades(&a2_dec);
    let a2_ok = !a2_div && probe.ratio_log[0].is_finite();

    // (MH): tail of a/(g sbar).
    let mh_f = |i: usize| {
        let y = probe.ys[i];
        let (a, _, g) = match coeffs.eval(y) {
            Ok(t) => t,
            Err(_) => return S::infinity(),
        };
        let v = a / g * probe.expo[i].exp();
        if v.is_nan() { S::infinity() } else { v }
    };
    let mh_dec = probe.decades(anchor, n - 1, false, mh_f);
    let (mh_total, mh_div) = classify_decades(&mh_dec);
    let mh_ok = !mh_div;

    // (MH2): tail of a(y)(y + w_a(y))/(g sbar), with
    // w_a(y) = A(y) + Sbar(y) R(y) built cumulatively on the grid. The
    // product Sbar*R is carried as one quantity so that only neighbor
    // differences of the (possibly huge) exponent enter.
    let a_over_gs = |j: usize| {
        // a/(g sbar) relative to sbar at a reference exponent `e_ref`.
        let y = probe.ys[j];
        let (a, _, g) = match coeffs.eval(y) {
            Ok(t) => t,
            Err(_) => return S::infinity(),
        };
        a / g
    };
    let mut sr = vec![S::zero(); n];
    for i in (0..n - 1).rev() {
        let width = probe.ys[i + 1] - probe.ys[i];
        // S_i/S_{i+1} <= 1; the clamp also covers segments whose panel
        // underflowed and left garbage in the ratio log.
        let carry_raw = (probe.ratio_log[i] - probe.ratio_log[i + 1] + probe.expo[i + 1]
            - probe.expo[i])
            .exp();
        let carry = if carry_raw.is_nan() {
            S::zero()
        } else {
            carry_raw.min(S::one())
        };
        let lo = a_over_gs(i) * probe.ratio_log[i].exp();
        let hi = a_over_gs(i + 1)
            * (probe.expo[i + 1] - probe.expo[i] + probe.ratio_log[i]).exp();
        sr[i] = sr[i + 1] * carry + (lo + hi) * width * S::of(0.5);
    }
    let mut a_cum = vec![S::zero(); n];
    for i in 0..n - 1 {
        let seg_f = |j: usize| {
            let v = a_over_gs(j) * probe.ratio_log[j].exp();
            if v.is_nan() { S::infinity() } else { v }
        };
        let width = probe.ys[i + 1] - probe.ys[i];
        a_cum[i + 1] = a_cum[i] + (seg_f(i) + seg_f(i + 1)) * width * S::of(0.5);
    }
    let mh2_f = |i: usize| {
        let y = probe.ys[i];
        let (a, _, g) = match coeffs.eval(y) {
            Ok(t) => t,
            Err(_) => return S::infinity(),
        };
        let wa = a_cum[i] + sr[i];
        let e = probe.expo[i].exp();
        if e == S::zero() {
            return S::zero();
        }
        let v = a * (y + wa) / g * e;
        if v.is_nan() { S::infinity() } else { v }
    };
    let (mh2_total, mh2_div) = if mh_ok {
        let dec = probe.decades(anchor, n - 1, false, mh2_f);
        classify_decades(&dec)
    } else {
        (S::infinity(), true)
    };
    let mh2_ok = !mh2_div;

    // Coarse error estimates: compare against the half-resolution sums.
    let half_sum = |dec: &[S]| -> S {
        let mut t = S::zero();
        for (i, &d) in dec.iter().enumerate() {
            if i % 2 == 0 {
                t += d + d;
            }
        }
        t
    };
    let err_of = |dec: &[S], total: S| -> S {
        if !total.is_finite() {
            return S::infinity();
        }
        ((half_sum(dec) - total - total) / S::of(3.0)).abs()
    };

    Ok(AssumptionReport {
        a1_ok,
        a2_ok,
        sbar_ok,
        mh_ok,
        mh2_ok,
        witnesses: Witnesses {
            a_over_y_min: amin.to_f64_lossy(),
            a_over_y_max: amax.to_f64_lossy(),
            a2_integral: a2_total.to_f64_lossy(),
            a2_err: err_of(&a2_dec, a2_total).to_f64_lossy(),
            sbar_limit: sbar_probe.value.to_f64_lossy(),
            mh_integral: mh_total.to_f64_lossy(),
            mh_err: err_of(&mh_dec, mh_total).to_f64_lossy(),
            mh2_integral: mh2_total.to_f64_lossy(),
            mh2_err: S::zero().to_f64_lossy(),
            lipschitz_grid_only: coeffs.lipschitz_checked_on_grid_only(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientSet;

    fn feller(cap: f64) -> ScaleTable<f64> {
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 0.0, 0.0, 1.0)
            .with_domain_cap(cap)
            .build()
            .unwrap();
        build_scale_table(&c, GridSpec::default()).unwrap()
    }

    fn logistic() -> ScaleTable<f64> {
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 1.0, 2.0, 1.0)
            .with_domain_cap(1e4)
            .build()
            .unwrap();
        build_scale_table(&c, GridSpec::default()).unwrap()
    }

    // For a = g = y, h = 0: s = e^y, S = e^y - 1.
    #[test]
    fn feller_scale_closed_form() {
        let t = feller(100.0);
        for &y in &[1e-6, 1e-3, 0.5, 1.0, 3.0, 10.0] {
            assert!((t.s(y).unwrap() - y.exp()).abs() < 1e-8 * y.exp(), "s({y})");
            let s_exact = y.exp() - 1.0;
            assert!(
                (t.big_s(y).unwrap() - s_exact).abs() < 1e-8 * s_exact.max(1e-12),
                "S({y})"
            );
        }
    }

    #[test]
    fn feller_hitting_probability() {
        // P^1(T_2 < T_0) = (e - 1)/(e^2 - 1) = 1/(e + 1).
        let t = feller(100.0);
        let p = t.hitting_probability(1.0, 0.0, 2.0).unwrap();
        let exact = 1.0 / (1.0f64.exp() + 1.0);
        assert!((p - exact).abs() < 1e-9, "p={p}, exact={exact}");
    }

    #[test]
    fn hitting_probability_is_invariant_under_rescaling() {
        let t = logistic();
        let r = t.rescaled(7.25);
        let p0 = t.hitting_probability(0.7, 0.1, 1.9).unwrap();
        let p1 = r.hitting_probability(0.7, 0.1, 1.9).unwrap();
        assert!((p0 - p1).abs() < 1e-12);
        assert!((r.s(1.0).unwrap() / t.s(1.0).unwrap() - 7.25).abs() < 1e-9);
    }

    #[test]
    fn feller_is_exactly_critical() {
        let (theta, err) = feller(1e4).theta();
        assert!((theta - 1.0).abs() < 1e-8, "theta={theta}");
        assert!(err < 1e-6);
        assert_eq!(classify_regime(theta, err), Regime::Critical);
    }

    // theta for the logistic model, frozen from the scale-integral closed
    // form sqrt(2 pi) e^{1/2} Phi(1) evaluated with the error function.
    #[test]
    fn logistic_theta_matches_closed_form() {
        let (theta, _) = logistic().theta();
        let expected = 3.4770518117036944;
        assert!(
            (theta - expected).abs() < 1e-7,
            "theta={theta}, expected={expected}"
        );
    }

    // Pure competition power law: a = y, h = -y^2, g = y gives
    // theta = sqrt(2 pi) e^{1/2} (1 - Phi(1)).
    #[test]
    fn power_law_theta_matches_closed_form() {
        let c = CoefficientSet::<f64>::power_law([1.0, 0.0, 1.0, 1.0], [1.0, 2.0, 1.0])
            .with_domain_cap(1e4)
            .build()
            .unwrap();
        let t = build_scale_table(&c, GridSpec::default()).unwrap();
        let (theta, _) = t.theta();
        let expected = 0.6556795424187986;
        assert!(
            (theta - expected).abs() < 1e-7,
            "theta={theta}, expected={expected}"
        );
        assert_eq!(classify_regime(theta, 1e-9), Regime::Subcritical);
    }

    #[test]
    fn feller_occupation_functionals() {
        let t = feller(1e4);
        // w_a(x) = E^x int a(Y) dt = x for the critical Feller model.
        let a_fn = |z: f64| z;
        let (wa, _) = t.w_functional(1.0, &a_fn).unwrap();
        assert!((wa - 1.0).abs() < 1e-7, "wa={wa}");
        // w_id'(0) = int z/(z e^z) dz = 1.
        let (w0, _) = t.w_prime0(&a_fn);
        assert!((w0 - 1.0).abs() < 1e-7, "w0={w0}");
        // Long-run average at criticality: x * 1 / 1.
        let (ratio, _) = t.critical_time_average(1.0).unwrap();
        assert!((ratio - 1.0).abs() < 1e-5, "ratio={ratio}");
    }

    #[test]
    fn green_occupation_approaches_total_occupation() {
        // b -> inf recovers w_f; at b = 30 the Feller excursion has
        // essentially no mass above.
        let t = feller(1e4);
        let f = |z: f64| z * (-z).exp();
        let (w, _) = t.w_functional(1.0, &f).unwrap();
        let (gr, _) = t.green_occupation(1.0, 30.0, &f).unwrap();
        assert!((w - gr).abs() < 1e-6, "w={w} green={gr}");
    }

    #[test]
    fn green_occupation_is_invariant_under_rescaling() {
        let t = logistic();
        let f = |z: f64| z;
        let (g0, _) = t.green_occupation(0.8, 1.9, &f).unwrap();
        let (g1, _) = t.rescaled(3.7).green_occupation(0.8, 1.9, &f).unwrap();
        assert!((g0 - g1).abs() < 1e-9 * g0.abs().max(1.0));
    }

    #[test]
    fn subcritical_expected_area_is_finite_and_critical_is_not() {
        let c = CoefficientSet::<f64>::power_law([1.0, 0.0, 1.0, 1.0], [1.0, 2.0, 1.0])
            .with_domain_cap(1e4)
            .build()
            .unwrap();
        let t = build_scale_table(&c, GridSpec::default()).unwrap();
        let (area, err) = t.expected_total_area(1.0).unwrap();
        assert!(area.is_finite() && area > 0.0 && err < 1e-4);
        let (inf_area, _) = feller(1e4).expected_total_area(1.0).unwrap();
        assert!(inf_area.is_infinite());
    }

    // Q-moment cross-check: the second moment has the equivalent form
    // 4 int f/(g s) A(z) dz with A(z) = int_0^z S f/(g s) (integration by
    // parts of the tail term).
    #[test]
    fn q_second_moment_two_routes_agree() {
        let t = feller(1e4);
        let f = |z: f64| z * (-z).exp();
        let (m2, _) = t.q_functional(&f, 2).unwrap();
        let inner = |z: f64| {
            integrate_to_zero(
                |u: f64| f(u) * (t.ln_big_s_at(u) + t.expo_at(u)).exp() / t.coeffs.g(u),
                z,
                1e-10,
            )
            .value
        };
        let outer = |z: f64| 4.0 * f(z) * t.expo_any(z).exp() / t.coeffs.g(z) * inner(z);
        let head = integrate_to_zero(&outer, 1.0, 1e-9);
        let tail = integrate_semi_infinite(&outer, 1.0, 1e-9);
        let m2_alt = head.value + tail.value;
        assert!(
            (m2 - m2_alt).abs() < 1e-6 * m2.abs().max(1.0),
            "m2={m2} alt={m2_alt}"
        );
    }

    #[test]
    fn resolvent_slope_matches_feller_closed_form() {
        // F(alpha) = 1/(1+alpha) for the critical Feller model.
        let t = feller(40.0);
        for &alpha in &[0.0, 0.5, 2.0] {
            let f = t.resolvent_slope(alpha).unwrap();
            let exact = 1.0 / (1.0 + alpha);
            assert!((f - exact).abs() < 1e-7, "F({alpha})={f}, exact={exact}");
        }
    }

    #[test]
    fn resolvent_slope_at_zero_recovers_theta_for_logistic() {
        let t = logistic();
        let f0 = t.resolvent_slope(0.0).unwrap();
        let (theta, _) = t.theta();
        assert!((f0 - theta).abs() < 1e-6, "F(0)={f0}, theta={theta}");
    }

    #[test]
    fn fixed_point_map_matches_feller_closed_form() {
        // k(z) = (sqrt(1+4z) - 1)/2 for the critical Feller model.
        let t = feller(40.0);
        for &z in &[0.3, 1.0, 4.0] {
            let k = t.fixed_point_map(z).unwrap();
            let exact = ((1.0 + 4.0 * z).sqrt() - 1.0) / 2.0;
            assert!((k - exact).abs() < 1e-6, "k({z})={k}, exact={exact}");
        }
        // Critical model: the maximal fixed point is zero.
        let (q, _) = t.fixed_point_q().unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn supercritical_logistic_has_positive_alpha_and_q() {
        let t = logistic();
        let (alpha, _) = t.malthusian_alpha().unwrap();
        assert!(alpha > 0.0 && alpha.is_finite());
        // Consistency: F(alpha) = 1.
        let f = t.resolvent_slope(alpha).unwrap();
        assert!((f - 1.0).abs() < 1e-6, "F(alpha)={f}");
        let (q, _) = t.fixed_point_q().unwrap();
        assert!(q > 0.0 && q.is_finite());
        let k = t.fixed_point_map(q).unwrap();
        assert!((k - q).abs() < 1e-6 * q.max(1.0), "k(q)={k}, q={q}");
        let surv = t.survival_probability(1.0).unwrap();
        assert!(surv > 0.0 && surv < 1.0);
    }

    #[test]
    fn up_drift_matches_closed_form_and_limit() {
        let t = feller(100.0);
        // At y = 1: -1 + 2 e/(e - 1).
        let exact = -1.0 + 2.0 * 1.0f64.exp() / (1.0f64.exp() - 1.0);
        let d = t.up_drift_fast(1.0);
        assert!((d - exact).abs() < 1e-4 * exact, "d={d}, exact={exact}");
        // y -> 0: drift ~ 2 g(y)/y -> 2 g'(0) = 2.
        let d0 = t.up_drift_fast(1e-6);
        assert!((d0 * 1e-6 / (2.0 * 1e-6) - 1.0).abs() < 1e-3, "d0={d0}");
    }

    #[test]
    fn analyze_reports_per_regime_fields() {
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 1.0, 2.0, 1.0)
            .with_domain_cap(1e4)
            .build()
            .unwrap();
        let rep = analyze(&c, 1.0, GridSpec::default()).unwrap();
        assert_eq!(rep.regime, Regime::Supercritical);
        assert!(rep.alpha.unwrap() > 0.0);
        assert!(rep.q.unwrap() > 0.0);
        assert!(rep.expected_area.is_none());
        let json = serde_json::to_value(&rep).unwrap();
        assert!(json.get("theta").is_some());
        assert!(json.get("regime").is_some());
    }

    #[test]
    fn assumptions_hold_for_reference_models() {
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 1.0, 2.0, 1.0)
            .build()
            .unwrap();
        let rep = validate_assumptions_impl(&c, 1e-9).unwrap();
        assert!(rep.a1_ok && rep.a2_ok && rep.sbar_ok && rep.mh_ok && rep.mh2_ok, "{rep:?}");
        let f = CoefficientSet::<f64>::logistic_feller(1.0, 0.0, 0.0, 1.0)
            .build()
            .unwrap();
        let rep = validate_assumptions_impl(&f, 1e-9).unwrap();
        assert!(rep.all_core_ok() && rep.mh2_ok);
    }

    // a = y/2, h = y, g = y^2: the scale exponent integrand is 1/(2y), so
    // the scale density blows up at zero and the near-zero occupation
    // integral diverges.
    #[test]
    fn assumption_violation_is_detected() {
        let c = CoefficientSet::<f64>::power_law([0.5, 1.0, 0.0, 1.0], [1.0, 2.0, 2.0])
            .build()
            .unwrap();
        let rep = validate_assumptions_impl(&c, 1e-9).unwrap();
        assert!(!rep.sbar_ok || !rep.a2_ok);
        assert!(analyze(&c, 1.0, GridSpec::default()).is_err());
    }
}
