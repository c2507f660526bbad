//! Euler–Maruyama simulation of the one-dimensional island diffusion
//! dY = (-a(Y) + h(Y)) dt + sqrt(2 g(Y)) dB, absorbed at zero.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coeffs::Coeffs;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// One simulated trajectory on a uniform time grid.
///
/// `values[i]` is the state at time `i * dt`. If the path was absorbed,
/// the final entry is exactly `0.0` and the path is truncated there; an
/// unabsorbed path has `ceil(horizon / dt) + 1` entries.
#[derive(Debug, Clone)]
pub struct DiffusionPath {
    pub dt: f64,
    pub values: Vec<f64>,
    pub absorption_time: Option<f64>,
    pub horizon: f64,
    pub stream: u64,
}

impl DiffusionPath {
    /// Linear interpolation at lag `t` since the path start; `0.0` at and
    /// beyond absorption, and beyond the recorded horizon.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 || self.values.is_empty() {
            return 0.0;
        }
        let pos = t / self.dt;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return if i + 1 == self.values.len() && (pos - i as f64).abs() < 1e-12 {
                self.values[i]
            } else {
                0.0
            };
        }
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Time of the last recorded sample.
    pub fn end_time(&self) -> f64 {
        self.dt * (self.values.len().saturating_sub(1)) as f64
    }
}

/// Time weighting applied to path functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Plain,
    TimeWeighted,
    ExpAlpha(f64),
}

impl Weighting {
    fn at(self, t: f64) -> f64 {
        match self {
            Weighting::Plain => 1.0,
            Weighting::TimeWeighted => t,
            Weighting::ExpAlpha(alpha) => (-alpha * t).exp(),
        }
    }
}

/// Threshold below which a step is declared absorbed.
pub fn absorb_eps(y0: f64) -> f64 {
    1e-9 * y0.max(1.0)
}

/// Simulates one path started at `y0` until absorption or `horizon`.
pub fn simulate_path(
    coeffs: &Coeffs<f64>,
    y0: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    stream: u64,
) -> Result<DiffusionPath> {
    if !(y0 >= 0.0) || !y0.is_finite() {
        return Err(Error::Domain(format!("start state {y0} must be finite and nonnegative")));
    }
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::Domain("dt and horizon must be positive".into()));
    }
    let mut rng = stream_rng(seed, stream);
    simulate_path_with(coeffs, y0, dt, horizon, stream, &mut rng)
}

/// As [`simulate_path`] but drawing from an existing stream.
pub fn simulate_path_with(
    coeffs: &Coeffs<f64>,
    y0: f64,
    dt: f64,
    horizon: f64,
    stream: u64,
    rng: &mut ChaCha8Rng,
) -> Result<DiffusionPath> {
    let eps = absorb_eps(y0);
    let hull = coeffs.eval_hull();
    let n_steps = (horizon / dt).ceil() as usize;
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut absorption_time = None;

    if y0 <= eps {
        values.push(0.0);
        absorption_time = Some(0.0);
    } else {
        values.push(y0);
        let mut y = y0;
        for i in 0..n_steps {
            // States are clamped to the table/domain hull before coefficient
            // evaluation; excursions above it keep the hull dynamics.
            let (a, h, g) = coeffs.eval(y.min(hull))?;
            let z: f64 = StandardNormal.sample(rng);
            let mut next = y + (h - a) * dt + (2.0 * g * dt).sqrt() * z;
            if next <= eps {
                values.push(0.0);
                absorption_time = Some((i + 1) as f64 * dt);
                break;
            }
            if !next.is_finite() {
                return Err(Error::Numerical("path step produced a non-finite state".into()));
            }
            next = next.min(hull.max(y0));
            values.push(next);
            y = next;
        }
    }

    Ok(DiffusionPath { dt, values, absorption_time, horizon, stream })
}

/// First grid time at which the path is at or above level `b` (upcrossings
/// between grid points are not detected).
pub fn first_hitting(path: &DiffusionPath, b: f64) -> Option<f64> {
    path.values
        .iter()
        .position(|&v| v >= b)
        .map(|i| i as f64 * path.dt)
}

/// Trapezoid approximation of `∫ f(Y_t) w(t) dt` over the recorded path.
pub fn path_functional(path: &DiffusionPath, f: impl Fn(f64) -> f64, w: Weighting) -> f64 {
    let dt = path.dt;
    let mut acc = 0.0;
    for i in 1..path.values.len() {
        let t0 = (i - 1) as f64 * dt;
        let t1 = i as f64 * dt;
        let lo = f(path.values[i - 1]) * w.at(t0);
        let hi = f(path.values[i]) * w.at(t1);
        acc += 0.5 * (lo + hi) * dt;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientSet;
    use rayon::prelude::*;

    fn feller() -> Coeffs<f64> {
        // a = y, h = 0, g = y
        CoefficientSet::<f64>::logistic_feller(1.0, 0.0, 0.0, 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn zero_start_is_absorbed_immediately() {
        let c = feller();
        let p = simulate_path(&c, 0.0, 1e-3, 1.0, 1, 0).unwrap();
        assert_eq!(p.values, vec![0.0]);
        assert_eq!(p.absorption_time, Some(0.0));
    }

    #[test]
    fn absorbed_tail_is_zero_and_truncated() {
        let c = feller();
        for stream in 0..50 {
            let p = simulate_path(&c, 1.0, 1e-3, 60.0, 7, stream).unwrap();
            if let Some(t) = p.absorption_time {
                assert_eq!(*p.values.last().unwrap(), 0.0);
                assert!((p.end_time() - t).abs() < 1e-12);
                assert!(p.values[..p.values.len() - 1].iter().all(|&v| v > 0.0));
            }
        }
    }

    #[test]
    fn feller_mean_matches_exponential_decay() {
        // E[Y_t] = y0 e^{-kappa t} for the linear-drift family.
        let c = feller();
        let n = 10_000usize;
        let dt = 1e-3;
        for &t in &[0.5f64, 1.0, 2.0] {
            let vals: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let p = simulate_path(&c, 1.0, dt, t, 11, i as u64).unwrap();
                    p.value_at(t)
                })
                .collect();
            let mean: f64 = vals.iter().sum::<f64>() / n as f64;
            let var: f64 =
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            let expect = (-t as f64).exp();
            assert!(
                (mean - expect).abs() < 3.0 * se + 5e-3 * expect,
                "t={t}: mean {mean} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn noiseless_table_decays_deterministically() {
        // a - h = y with g = 0: dY = -Y dt exactly in each Euler step.
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let a: Vec<f64> = grid.iter().map(|&y| y).collect();
        let h = vec![0.0; grid.len()];
        let g = vec![0.0; grid.len()];
        let c = CoefficientSet::<f64>::tabulated(grid, a, h, g, 0.9, 1.1)
            .build()
            .unwrap();
        let dt = 1e-4;
        let p = simulate_path(&c, 1.0, dt, 2.0, 5, 0).unwrap();
        let expect = (1.0 - dt).powi(10_000);
        assert!((p.value_at(1.0) - expect).abs() < 1e-12);
        assert!(p.absorption_time.is_none());
    }

    #[test]
    fn exp_alpha_zero_equals_plain() {
        let c = feller();
        let p = simulate_path(&c, 1.0, 1e-3, 3.0, 3, 4).unwrap();
        let plain = path_functional(&p, |y| y * y, Weighting::Plain);
        let exp0 = path_functional(&p, |y| y * y, Weighting::ExpAlpha(0.0));
        assert_eq!(plain, exp0);
    }

    #[test]
    fn paths_are_bitwise_reproducible() {
        let c = feller();
        let p1 = simulate_path(&c, 1.0, 1e-3, 5.0, 99, 12).unwrap();
        let p2 = simulate_path(&c, 1.0, 1e-3, 5.0, 99, 12).unwrap();
        assert_eq!(p1.values, p2.values);
        assert_eq!(p1.absorption_time, p2.absorption_time);
    }

    #[test]
    fn first_hitting_detects_upcrossing() {
        let p = DiffusionPath {
            dt: 0.5,
            values: vec![1.0, 1.5, 2.2, 1.8],
            absorption_time: None,
            horizon: 1.5,
            stream: 0,
        };
        assert_eq!(first_hitting(&p, 2.0), Some(1.0));
        assert_eq!(first_hitting(&p, 3.0), None);
    }
}
