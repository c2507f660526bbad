//! Weighted sampling of island excursions.
//!
//! The excursion measure is sampled by running the conditioned upward
//! diffusion from a state near zero until it first reaches the threshold
//! `epsilon`, then switching to the unconditioned dynamics until
//! absorption. Each sample carries the importance weight `1 / S(epsilon)`
//! (scale function normalized to unit density at zero), so weighted
//! averages estimate integrals against the excursion measure restricted
//! to paths whose maximum reaches `epsilon`.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{child_stream, stream_rng};
use crate::scale::ScaleTable;
use crate::sde::{path_functional, simulate_path_with, DiffusionPath, Weighting};

/// Factor applied to `epsilon` to place the start of the upward phase.
pub const START_EPS_FACTOR: f64 = 1e-3;
/// Attempts before the sampler gives up on reaching `epsilon`.
pub const DEFAULT_RETRY_CAP: u32 = 100;

/// One weighted excursion sample.
#[derive(Debug, Clone)]
pub struct Excursion {
    pub epsilon: f64,
    /// Full trajectory: upward phase to `epsilon` followed by the free run.
    pub path: DiffusionPath,
    /// Grid time at which the path first reached `epsilon`.
    pub t_eps: f64,
    /// Absorption time, when observed within the horizon.
    pub lifetime: Option<f64>,
    /// Importance weight `1 / S(epsilon)`.
    pub weight: f64,
    /// True when the horizon was hit before absorption.
    pub truncated: bool,
}

impl Excursion {
    pub fn max(&self) -> f64 {
        self.path.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Drift of the diffusion conditioned to reach higher levels:
/// `(h - a) + 2 g s / S`.
pub fn up_drift(table: &ScaleTable<f64>, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("up_drift needs a positive state, got {y}")));
    }
    let v = table.up_drift_fast(y);
    if !v.is_finite() {
        return Err(Error::Numerical(format!("up_drift not finite at {y}")));
    }
    Ok(v)
}

/// Samples one excursion that reaches `epsilon`, retrying (with fresh
/// sub-streams) when the upward phase stalls within `horizon`.
pub fn sample_excursion(
    table: &ScaleTable<f64>,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    stream: u64,
    retry_cap: u32,
) -> Result<Excursion> {
    let coeffs = table.coeffs();
    let hull = coeffs.eval_hull();
    if !(epsilon > 0.0) || epsilon >= hull {
        return Err(Error::Domain(format!(
            "epsilon {epsilon} must lie strictly inside (0, {hull})"
        )));
    }
    if !(dt > 0.0) || !(horizon > dt) {
        return Err(Error::Domain("dt and horizon must be positive with horizon > dt".into()));
    }
    let weight = 1.0 / table.big_s(epsilon)?;

    for attempt in 0..retry_cap.max(1) {
        let mut rng = stream_rng(seed, child_stream(stream, attempt as u64));
        if let Some(exc) = attempt_excursion(table, epsilon, dt, horizon, stream, weight, &mut rng)? {
            return Ok(exc);
        }
    }
    Err(Error::Numerical(format!(
        "excursion sampler failed to reach epsilon={epsilon} in {retry_cap} attempts"
    )))
}

fn attempt_excursion(
    table: &ScaleTable<f64>,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    stream: u64,
    weight: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Excursion>> {
    let coeffs = table.coeffs();
    let start = epsilon * START_EPS_FACTOR;
    let floor = start * START_EPS_FACTOR;
    // Visibility means the excursion reaches `epsilon` at some point, not
    // necessarily before the counting horizon, so the upward phase gets a
    // budget of its own and may overrun a short horizon.
    let max_up_steps = ((horizon / dt).ceil() as usize).max(200_000);

    // Upward phase: drift (h - a) + 2 g s / S keeps the path away from zero.
    let mut values = vec![start];
    let mut y = start;
    let mut reached = false;
    for _ in 0..max_up_steps {
        let g = coeffs.g(y);
        let drift = table.up_drift_fast(y);
        let z: f64 = StandardNormal.sample(rng);
        let mut next = y + drift * dt + (2.0 * g * dt).sqrt() * z;
        if !next.is_finite() {
            return Err(Error::Numerical("upward phase produced a non-finite state".into()));
        }
        // Zero is an entrance boundary for the conditioned dynamics; the
        // discrete step may still undershoot, so clamp to a tiny floor.
        next = next.max(floor);
        if next >= epsilon {
            // The continuous path crosses the threshold at exactly epsilon;
            // keeping the Euler overshoot would start the free phase too
            // high and bias every downstream functional by O(sqrt(dt)).
            next = epsilon;
            reached = true;
        }
        values.push(next);
        y = next;
        if reached {
            break;
        }
    }
    if !reached {
        return Ok(None);
    }
    let t_eps = dt * (values.len() - 1) as f64;

    // Free phase: unconditioned dynamics until absorption or the budget
    // (measured from the excursion's own start) runs out.
    let remaining = horizon.max(t_eps + dt) - t_eps;
    let mut lifetime = None;
    let mut truncated = true;
    if remaining > dt {
        let tail = simulate_path_with(coeffs, y, dt, remaining, stream, rng)?;
        values.extend_from_slice(&tail.values[1..]);
        if let Some(t_abs) = tail.absorption_time {
            lifetime = Some(t_eps + t_abs);
            truncated = false;
        }
    }

    let path = DiffusionPath {
        dt,
        values,
        absorption_time: lifetime,
        horizon,
        stream,
    };
    Ok(Some(Excursion { epsilon, path, t_eps, lifetime, weight, truncated }))
}

/// Samples an ensemble of excursions on independent streams.
pub fn sample_ensemble(
    table: &ScaleTable<f64>,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    base_stream: u64,
    n: usize,
    retry_cap: u32,
) -> Result<Vec<Excursion>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            sample_excursion(
                table,
                epsilon,
                dt,
                horizon,
                seed,
                child_stream(base_stream, i as u64),
                retry_cap,
            )
        })
        .collect()
}

/// Weighted Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
}

fn weighted_mean(samples: &[Excursion], vals: &[f64]) -> McEstimate {
    let n = vals.len() as f64;
    let w = samples[0].weight;
    let mean: f64 = vals.iter().sum::<f64>() / n;
    let var: f64 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    McEstimate { value: w * mean, std_err: w * (var / n).sqrt() }
}

fn require_uniform_epsilon(samples: &[Excursion]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Domain("empty excursion sample".into()));
    }
    let eps = samples[0].epsilon;
    if samples.iter().any(|e| e.epsilon != eps) {
        return Err(Error::Domain("mixed epsilon values in one excursion ensemble".into()));
    }
    Ok(())
}

/// Estimates the excursion-measure moment `Q[(∫ f(χ_s) w(s) ds)^m]`.
pub fn mc_q_functional(
    samples: &[Excursion],
    f: impl Fn(f64) -> f64 + Sync,
    m: u8,
    weighting: Weighting,
) -> Result<McEstimate> {
    require_uniform_epsilon(samples)?;
    if m == 0 {
        return Err(Error::Domain("moment order must be at least 1".into()));
    }
    let vals: Vec<f64> = samples
        .par_iter()
        .map(|e| path_functional(&e.path, &f, weighting).powi(m as i32))
        .collect();
    Ok(weighted_mean(samples, &vals))
}

/// Estimates the curve `t -> Q[f(χ_t)]` pointwise on `grid`.
pub fn estimate_fq_curve(
    samples: &[Excursion],
    f: impl Fn(f64) -> f64 + Sync,
    grid: &[f64],
) -> Result<Vec<(f64, McEstimate)>> {
    require_uniform_epsilon(samples)?;
    Ok(grid
        .iter()
        .map(|&t| {
            let vals: Vec<f64> = samples.iter().map(|e| f(e.path.value_at(t))).collect();
            (t, weighted_mean(samples, &vals))
        })
        .collect())
}

/// Mean and `x log+ x` statistics of `A_alpha = ∫ a(χ_s) e^{-alpha s} ds`.
#[derive(Debug, Clone, Copy)]
pub struct AlphaAreaStats {
    pub mean: McEstimate,
    pub xlogx: McEstimate,
}

pub fn estimate_a_alpha_stats(
    table: &ScaleTable<f64>,
    samples: &[Excursion],
    alpha: f64,
) -> Result<AlphaAreaStats> {
    require_uniform_epsilon(samples)?;
    let coeffs = table.coeffs();
    let a_vals: Vec<f64> = samples
        .par_iter()
        .map(|e| path_functional(&e.path, |y| coeffs.a(y), Weighting::ExpAlpha(alpha)))
        .collect();
    let xlog: Vec<f64> = a_vals
        .iter()
        .map(|&v| if v > 1.0 { v * v.ln() } else { 0.0 })
        .collect();
    Ok(AlphaAreaStats {
        mean: weighted_mean(samples, &a_vals),
        xlogx: weighted_mean(samples, &xlog),
    })
}

/// Linear-in-epsilon extrapolation to zero from the two smallest thresholds.
/// `points` holds `(epsilon, estimate, std_err)` triples.
pub fn extrapolate_to_zero(points: &[(f64, f64, f64)]) -> Result<McEstimate> {
    if points.len() < 2 {
        return Err(Error::Domain("extrapolation needs at least two epsilon levels".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (e1, v1, s1) = sorted[0];
    let (e2, v2, s2) = sorted[1];
    if e1 <= 0.0 || e2 <= e1 {
        return Err(Error::Domain("epsilon levels must be positive and distinct".into()));
    }
    let w1 = e2 / (e2 - e1);
    let w2 = -e1 / (e2 - e1);
    Ok(McEstimate {
        value: w1 * v1 + w2 * v2,
        std_err: ((w1 * s1).powi(2) + (w2 * s2).powi(2)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientSet;
    use crate::scale::{build_scale_table, GridSpec};

    fn feller_table() -> ScaleTable<f64> {
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 0.0, 0.0, 1.0)
            .with_domain_cap(1e4)
            .build()
            .unwrap();
        build_scale_table(&c, GridSpec::default()).unwrap()
    }

    #[test]
    fn up_drift_matches_closed_form_at_one() {
        // (h - a) + 2 g s / S = -1 + 2 e / (e - 1) at y = 1.
        let t = feller_table();
        let expect = -1.0 + 2.0 * std::f64::consts::E / (std::f64::consts::E - 1.0);
        let got = up_drift(&t, 1.0).unwrap();
        assert!((got - expect).abs() < 1e-3 * expect, "{got} vs {expect}");
    }

    #[test]
    fn up_drift_small_y_limit() {
        // Near zero the conditioned drift behaves like 2 g / y.
        let t = feller_table();
        let y = 1e-6;
        let ratio = up_drift(&t, y).unwrap() * y / (2.0 * t.coeffs().g(y));
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn up_drift_rejects_nonpositive_state() {
        let t = feller_table();
        assert!(up_drift(&t, 0.0).is_err());
        assert!(up_drift(&t, -1.0).is_err());
    }

    #[test]
    fn excursions_reach_epsilon_and_are_reproducible() {
        let t = feller_table();
        let e1 = sample_excursion(&t, 0.5, 1e-3, 50.0, 7, 3, 100).unwrap();
        let e2 = sample_excursion(&t, 0.5, 1e-3, 50.0, 7, 3, 100).unwrap();
        assert_eq!(e1.path.values, e2.path.values);
        assert!(e1.max() >= 0.5);
        assert!((e1.path.value_at(e1.t_eps) - 0.5).abs() < 0.2);
        let s_eps = (0.5f64).exp() - 1.0;
        assert!((e1.weight - 1.0 / s_eps).abs() < 1e-6 / s_eps);
    }

    #[test]
    fn level_crossing_fractions_follow_scale_ratio() {
        // P(excursion from the eps class reaches b) = S(eps)/S(b).
        let t = feller_table();
        let eps = 0.5;
        let n = 4000;
        let samples = sample_ensemble(&t, eps, 1e-3, 80.0, 11, 5, n, 100).unwrap();
        let s = |y: f64| y.exp() - 1.0;
        for &b in &[1.0, 2.0] {
            let frac = samples.iter().filter(|e| e.max() >= b).count() as f64 / n as f64;
            let expect = s(eps) / s(b);
            let se = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!(
                (frac - expect).abs() < 3.0 * se + 0.02,
                "b={b}: {frac} vs {expect}"
            );
        }
    }

    #[test]
    fn post_threshold_phase_is_markovian() {
        // Lifetime beyond T_eps matches absorption of a fresh path from eps.
        let t = feller_table();
        let eps = 0.5;
        let n = 1500;
        let cap = 5.0;
        let samples = sample_ensemble(&t, eps, 1e-3, 80.0, 13, 9, n, 100).unwrap();
        let from_exc: Vec<f64> = samples
            .iter()
            .map(|e| e.lifetime.map(|l| l - e.t_eps).unwrap_or(e.path.horizon).min(cap))
            .collect();
        let from_fresh: Vec<f64> = (0..n)
            .map(|i| {
                let p =
                    crate::sde::simulate_path(t.coeffs(), eps, 1e-3, 80.0, 13, 40_000 + i as u64)
                        .unwrap();
                p.absorption_time.unwrap_or(80.0).min(cap)
            })
            .collect();
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0);
            (m, (var / v.len() as f64).sqrt())
        };
        let (m1, s1) = stats(&from_exc);
        let (m2, s2) = stats(&from_fresh);
        let gap = (m1 - m2).abs();
        let se = (s1 * s1 + s2 * s2).sqrt();
        assert!(gap < 3.0 * se + 0.02, "means {m1} vs {m2} (se {se})");
    }

    #[test]
    fn mixed_epsilon_is_rejected() {
        let t = feller_table();
        let a = sample_excursion(&t, 0.5, 1e-3, 20.0, 1, 1, 100).unwrap();
        let b = sample_excursion(&t, 0.25, 1e-3, 20.0, 1, 2, 100).unwrap();
        assert!(mc_q_functional(&[a, b], |y| y, 1, Weighting::Plain).is_err());
    }

    #[test]
    fn extrapolation_removes_linear_bias_exactly() {
        let pts = [(0.2, 3.0 + 0.2 * 7.0, 0.0), (0.1, 3.0 + 0.1 * 7.0, 0.0)];
        let e = extrapolate_to_zero(&pts).unwrap();
        assert!((e.value - 3.0).abs() < 1e-12);
    }
}
