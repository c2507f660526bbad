//! Model coefficients `(a, h, g)`: parametric families, pointwise
//! evaluation, and numerical verification of the standing assumptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::interp::LinearInterp;
use crate::scalar::Scalar;

/// Parametric family of the coefficient triple.
///
/// * `LogisticFeller`: `a = κy`, `h = γy(K−y)`, `g = βy`.
/// * `PowerLaw`: `a = c1·y`, `h = c2·y^k1 − c3·y^k2`, `g = c4·y^k3`.
/// * `Tabulated`: sampled values with linear interpolation between grid
///   points; extrapolation is forbidden.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>")
)]
pub enum Family<S> {
    LogisticFeller {
        kappa: S,
        gamma: S,
        carrying_capacity: S,
        beta: S,
    },
    PowerLaw {
        c1: S,
        c2: S,
        c3: S,
        c4: S,
        k1: S,
        k2: S,
        k3: S,
    },
    Tabulated {
        grid: Vec<S>,
        a: Vec<S>,
        h: Vec<S>,
        g: Vec<S>,
        /// Lower linearity constant for `a` (assumed, checked on the grid).
        c1: S,
        /// Upper linearity constant for `a`.
        c2: S,
    },
}

/// Coefficient triple with its numerical domain truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>")
)]
pub struct CoefficientSet<S> {
    pub family: Family<S>,
    /// Upper truncation of the state space for numerics: the state space is
    /// treated as `[0, domain_cap]`, with truncation error reported by the
    /// quadrature routines.
    pub domain_cap: S,
}

/// Default state-space truncation.
pub const DEFAULT_DOMAIN_CAP: f64 = 1e4;

#[derive(Debug, Clone)]
enum Interp<S> {
    None,
    Tab {
        a: LinearInterp<S>,
        h: LinearInterp<S>,
        g: LinearInterp<S>,
    },
}

/// Validated, evaluation-ready coefficients.
#[derive(Debug, Clone)]
pub struct Coeffs<S> {
    pub set: CoefficientSet<S>,
    interp: Interp<S>,
}

impl<S: Scalar> CoefficientSet<S> {
    pub fn logistic_feller(kappa: S, gamma: S, carrying_capacity: S, beta: S) -> Self {
        Self {
            family: Family::LogisticFeller {
                kappa,
                gamma,
                carrying_capacity,
                beta,
            },
            domain_cap: S::of(DEFAULT_DOMAIN_CAP),
        }
    }

    pub fn power_law(c: [S; 4], k: [S; 3]) -> Self {
        Self {
            family: Family::PowerLaw {
                c1: c[0],
                c2: c[1],
                c3: c[2],
                c4: c[3],
                k1: k[0],
                k2: k[1],
                k3: k[2],
            },
            domain_cap: S::of(DEFAULT_DOMAIN_CAP),
        }
    }

    pub fn tabulated(grid: Vec<S>, a: Vec<S>, h: Vec<S>, g: Vec<S>, c1: S, c2: S) -> Self {
        let cap = grid.last().copied().unwrap_or_else(|| S::of(DEFAULT_DOMAIN_CAP));
        Self {
            family: Family::Tabulated { grid, a, h, g, c1, c2 },
            domain_cap: cap,
        }
    }

    pub fn with_domain_cap(mut self, cap: S) -> Self {
        self.domain_cap = cap;
        self
    }

    /// Checks the well-formedness of the parameters and builds the
    /// evaluation-ready form.
    pub fn build(self) -> Result<Coeffs<S>> {
        let zero = S::zero();
        if !(self.domain_cap > zero) {
            return Err(Error::Domain("domain_cap must be positive".into()));
        }
        let interp = match &self.family {
            Family::LogisticFeller {
                kappa,
                gamma,
                carrying_capacity,
                beta,
            } => {
                if !(*kappa > zero && *beta > zero && *gamma >= zero && *carrying_capacity >= zero)
                {
                    return Err(Error::Domain(
                        "logistic-Feller family needs kappa>0, beta>0, gamma>=0, K>=0".into(),
                    ));
                }
                Interp::None
            }
            Family::PowerLaw {
                c1,
                c2,
                c3,
                c4,
                k1,
                k2,
                k3,
            } => {
                if !(*c1 > zero && *c4 > zero && *c2 >= zero && *c3 >= zero) {
                    return Err(Error::Domain(
                        "power-law family needs c1>0, c4>0, c2>=0, c3>=0".into(),
                    ));
                }
                // k3 = 2 is representable but fails the near-zero occupation
                // assumption; the checker reports it rather than the parser.
                if !(*k1 >= S::one() && *k2 > *k1 && *k3 >= S::one() && *k3 <= S::of(2.0)) {
                    return Err(Error::Domain(
                        "power-law family needs k2 > k1 >= 1 and k3 in [1, 2]".into(),
                    ));
                }
                Interp::None
            }
            Family::Tabulated {
                grid,
                a,
                h,
                g,
                c1,
                c2,
            } => {
                if !(*c1 > zero && *c2 >= *c1) {
                    return Err(Error::Domain(
                        "tabulated family needs 0 < c1 <= c2".into(),
                    ));
                }
                if grid.first().copied() != Some(zero) {
                    return Err(Error::Domain("tabulated grid must start at 0".into()));
                }
                if a.first().copied() != Some(zero)
                    || h.first().copied() != Some(zero)
                    || g.first().copied() != Some(zero)
                {
                    return Err(Error::Domain(
                        "tabulated samples must satisfy a(0)=h(0)=g(0)=0".into(),
                    ));
                }
                // Zero noise is allowed for pure-drift tables; only negative
                // diffusion is rejected. Scale-function machinery will refuse
                // such tables on its own when it divides by g.
                if g.iter().skip(1).any(|&v| v < zero) {
                    return Err(Error::Domain(
                        "tabulated g must be nonnegative".into(),
                    ));
                }
                Interp::Tab {
                    a: LinearInterp::new(grid.clone(), a.clone())?,
                    h: LinearInterp::new(grid.clone(), h.clone())?,
                    g: LinearInterp::new(grid.clone(), g.clone())?,
                }
            }
        };
        Ok(Coeffs { set: self, interp })
    }
}

impl<S: Scalar> Coeffs<S> {
    pub fn domain_cap(&self) -> S {
        self.set.domain_cap
    }

    /// Pointwise `(a, h, g)` at `y >= 0`.
    pub fn eval(&self, y: S) -> Result<(S, S, S)> {
        if y < S::zero() {
            return Err(Error::Domain(format!("state {y} is negative")));
        }
        if y == S::zero() {
            return Ok((S::zero(), S::zero(), S::zero()));
        }
        match (&self.set.family, &self.interp) {
            (
                Family::LogisticFeller {
                    kappa,
                    gamma,
                    carrying_capacity,
                    beta,
                },
                _,
            ) => Ok((
                *kappa * y,
                *gamma * y * (*carrying_capacity - y),
                *beta * y,
            )),
            (
                Family::PowerLaw {
                    c1,
                    c2,
                    c3,
                    c4,
                    k1,
                    k2,
                    k3,
                },
                _,
            ) => Ok((
                *c1 * y,
                *c2 * y.powf(*k1) - *c3 * y.powf(*k2),
                *c4 * y.powf(*k3),
            )),
            (Family::Tabulated { .. }, Interp::Tab { a, h, g }) => {
                Ok((a.eval(y)?, h.eval(y)?, g.eval(y)?))
            }
            _ => unreachable!("tabulated family always carries interpolants"),
        }
    }

    pub fn a(&self, y: S) -> S {
        self.eval(y).map(|t| t.0).unwrap_or_else(|_| S::nan())
    }

    pub fn h(&self, y: S) -> S {
        self.eval(y).map(|t| t.1).unwrap_or_else(|_| S::nan())
    }

    pub fn g(&self, y: S) -> S {
        self.eval(y).map(|t| t.2).unwrap_or_else(|_| S::nan())
    }

    /// The linearity band `(c1, c2)` with `c1·y <= a(y) <= c2·y`.
    pub fn linear_bounds(&self) -> (S, S) {
        match &self.set.family {
            Family::LogisticFeller { kappa, .. } => (*kappa, *kappa),
            Family::PowerLaw { c1, .. } => (*c1, *c1),
            Family::Tabulated { c1, c2, .. } => (*c1, *c2),
        }
    }

    /// `(-a(y) + h(y)) / g(y)`, the integrand of the scale density exponent.
    pub fn drift_over_g(&self, y: S) -> S {
        match self.eval(y) {
            Ok((a, h, g)) => (h - a) / g,
            Err(_) => S::nan(),
        }
    }

    /// Upper hull of the tabulated grid, or `domain_cap` for parametric
    /// families.
    pub fn eval_hull(&self) -> S {
        match &self.set.family {
            Family::Tabulated { grid, .. } => *grid.last().unwrap(),
            _ => self.set.domain_cap,
        }
    }

    /// Whether a grid-wise Lipschitz bound is the best we can certify
    /// (tabulated inputs only).
    pub fn lipschitz_checked_on_grid_only(&self) -> bool {
        matches!(self.set.family, Family::Tabulated { .. })
    }
}

/// Outcome of the standing-assumption checks, with the evaluated integrals
/// as witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// Linearity band and regularity of `(a, h, g)`.
    pub a1_ok: bool,
    /// Finiteness of the near-zero occupation integral.
    pub a2_ok: bool,
    /// Existence of the scale-density limit at zero.
    pub sbar_ok: bool,
    /// Finite expected total emigration intensity.
    pub mh_ok: bool,
    /// Finite second-moment analog.
    pub mh2_ok: bool,
    /// Numeric values of the integrals behind each flag, with error
    /// estimates where available.
    pub witnesses: Witnesses,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    /// min/max of `a(y)/y` over the sampled band.
    pub a_over_y_min: f64,
    pub a_over_y_max: f64,
    /// Value and error of the near-zero occupation integral at x = 1.
    pub a2_integral: f64,
    pub a2_err: f64,
    /// Limit of the scale-exponent integral toward zero.
    pub sbar_limit: f64,
    /// Value and error of the emigration-intensity tail integral from 1.
    pub mh_integral: f64,
    pub mh_err: f64,
    /// Value and error of the second-moment tail integral from 1.
    pub mh2_integral: f64,
    pub mh2_err: f64,
    /// True when regularity could only be checked on a tabulated grid.
    pub lipschitz_grid_only: bool,
}

impl AssumptionReport {
    pub fn all_core_ok(&self) -> bool {
        self.a1_ok && self.a2_ok && self.sbar_ok && self.mh_ok
    }
}

/// Verifies the standing assumptions by numerical quadrature with the
/// divergence heuristic from the scale module.
pub fn validate_assumptions<S: Scalar>(coeffs: &Coeffs<S>, tol: S) -> Result<AssumptionReport> {
    crate::scale::validate_assumptions_impl(coeffs, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic() -> Coeffs<f64> {
        CoefficientSet::logistic_feller(1.0, 1.0, 2.0, 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn logistic_feller_pointwise() {
        let c = logistic();
        let (a, h, g) = c.eval(1.0).unwrap();
        assert_eq!((a, h, g), (1.0, 1.0, 1.0));
    }

    #[test]
    fn zero_is_a_trap_for_the_coefficients() {
        let c = logistic();
        assert_eq!(c.eval(0.0).unwrap(), (0.0, 0.0, 0.0));
        let p = CoefficientSet::power_law([1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 1.0])
            .build()
            .unwrap();
        assert_eq!(p.eval(0.0).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn power_law_pointwise() {
        let p = CoefficientSet::power_law([1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 1.0])
            .build()
            .unwrap();
        let (a, h, g) = p.eval(2.0).unwrap();
        assert_eq!((a, h, g), (2.0, -2.0, 2.0));
    }

    #[test]
    fn negative_state_is_domain_error() {
        assert!(logistic().eval(-0.5).is_err());
    }

    #[test]
    fn tabulated_rejects_extrapolation_and_bad_samples() {
        let tab: Coeffs<f64> = CoefficientSet {
            family: Family::Tabulated {
                grid: vec![0.0, 1.0, 2.0],
                a: vec![0.0, 1.0, 2.0],
                h: vec![0.0, 0.5, 0.0],
                g: vec![0.0, 1.0, 2.0],
            c1: 0.9,
                c2: 1.1,
            },
            domain_cap: 2.0,
        }
        .build()
        .unwrap();
        assert!(tab.eval(2.5).is_err());
        assert!((tab.eval(0.5).unwrap().0 - 0.5).abs() < 1e-12);

        let bad = CoefficientSet::<f64> {
            family: Family::Tabulated {
                grid: vec![0.0, 1.0],
                a: vec![0.1, 1.0],
                h: vec![0.0, 0.0],
                g: vec![0.0, 1.0],
                c1: 1.0,
                c2: 1.0,
            },
            domain_cap: 1.0,
        };
        assert!(bad.build().is_err());
    }

    #[test]
    fn eval_is_continuous_at_random_points() {
        // Dense-sampling continuity probe on (0, cap].
        let c = logistic();
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let y = 1e-3 + u * 10.0;
            let (a0, h0, g0) = c.eval(y).unwrap();
            let d = 1e-9 * y.max(1.0);
            let (a1, h1, g1) = c.eval(y + d).unwrap();
            assert!((a1 - a0).abs() < 1e-6);
            assert!((h1 - h0).abs() < 1e-6);
            assert!((g1 - g0).abs() < 1e-6);
        }
    }
}
