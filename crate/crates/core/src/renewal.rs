//! Discrete renewal equation m(t) = f(t) + ∫_0^t m(t−s) μ(ds) governing
//! the first moment of the counted population, and the asymptotic-ratio
//! diagnostics for the solved curve.

use crate::error::{Error, Result};

/// Sampled inputs on one shared uniform grid starting at t = 0.
#[derive(Debug, Clone)]
pub struct RenewalInput {
    /// f(t_i), the directly-counted root term.
    pub f: Vec<f64>,
    /// Density of μ at t_i (μ has no atom at zero).
    pub mu: Vec<f64>,
    pub dt: f64,
}

impl RenewalInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Domain("renewal grid step must be positive".into()));
        }
        if self.f.len() != self.mu.len() || self.f.len() < 2 {
            return Err(Error::Domain(
                "f and mu must share a grid with at least two samples".into(),
            ));
        }
        if self.f.iter().chain(&self.mu).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("renewal inputs must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.dt * (self.f.len() - 1) as f64
    }
}

/// Forward-marching trapezoid solution of the renewal equation.
///
/// The convolution cell touching the current time enters implicitly; since
/// the equation is linear in `m(t_i)` the fixed point of that cell is taken
/// exactly, which keeps the scheme O(dt^2).
pub fn solve_renewal(input: &RenewalInput) -> Result<Vec<f64>> {
    input.validate()?;
    let n = input.f.len();
    let dt = input.dt;
    let f = &input.f;
    let mu = &input.mu;
    let mut m = vec![0.0; n];
    m[0] = f[0];
    for i in 1..n {
        // Trapezoid of ∫_0^{t_i} m(t_i - s) mu(s) ds excluding the m[i] term.
        let mut conv = 0.5 * m[0] * mu[i];
        for j in 1..i {
            conv += m[i - j] * mu[j];
        }
        let denom = 1.0 - 0.5 * dt * mu[0];
        if denom <= 0.0 {
            return Err(Error::Numerical(
                "renewal step is unstable: mu(0) * dt / 2 >= 1".into(),
            ));
        }
        m[i] = (f[i] + dt * conv) / denom;
        if !m[i].is_finite() {
            return Err(Error::Numerical("renewal solution became non-finite".into()));
        }
    }
    Ok(m)
}

/// Comparison of the solved curve's tail with the renewal-theorem limit
/// `e^{-αt} m(t) → ∫ e^{-αs} f(s) ds / ∫ s e^{-αs} μ(ds)`.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticRatios {
    /// Average of `e^{-αt} m(t)` over the last tenth of the grid.
    pub tail_ratio: f64,
    /// The theorem's limit assembled from the inputs.
    pub predicted: f64,
}

pub fn asymptotic_ratios(
    m: &[f64],
    alpha: f64,
    input: &RenewalInput,
) -> Result<AsymptoticRatios> {
    input.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::Precondition(format!(
            "asymptotic ratios need a positive Malthusian parameter, got {alpha}"
        )));
    }
    if m.len() != input.f.len() {
        return Err(Error::Domain("solution and input grids differ".into()));
    }
    let n = m.len();
    let dt = input.dt;
    let start = n - (n / 10).max(2);
    let tail: Vec<f64> = (start..n)
        .map(|i| (-alpha * i as f64 * dt).exp() * m[i])
        .collect();
    let tail_ratio = tail.iter().sum::<f64>() / tail.len() as f64;

    let num = trapezoid(&weighted(&input.f, alpha, dt), dt);
    let den = trapezoid(
        &input
            .mu
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let t = i as f64 * dt;
                t * (-alpha * t).exp() * v
            })
            .collect::<Vec<f64>>(),
        dt,
    );
    if den <= 0.0 {
        return Err(Error::Numerical("degenerate mean of the reproduction measure".into()));
    }
    Ok(AsymptoticRatios { tail_ratio, predicted: num / den })
}

/// Time average `(1/T) ∫_0^T m`, the critical-case limit diagnostic.
pub fn cesaro_mean(m: &[f64], dt: f64) -> f64 {
    trapezoid(m, dt) / (dt * (m.len() - 1) as f64)
}

fn weighted(v: &[f64], alpha: f64, dt: f64) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(i, &x)| (-alpha * i as f64 * dt).exp() * x)
        .collect()
}

fn trapezoid(v: &[f64], dt: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    dt * (0.5 * v[0] + inner + 0.5 * v[v.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel_returns_f() {
        let f: Vec<f64> = (0..100).map(|i| (i as f64 * 0.1).sin().abs()).collect();
        let input = RenewalInput { f: f.clone(), mu: vec![0.0; 100], dt: 0.1 };
        let m = solve_renewal(&input).unwrap();
        assert_eq!(m, f);
    }

    #[test]
    fn exponential_kernel_matches_closed_form() {
        // f = e^{-t}, mu density = c e^{-t}: m(t) = e^{-t} + c t e^{-t}... the
        // resolvent of this kernel is known: m(t) = e^{(c-1)t}. Verify O(dt^2).
        let c = 0.8;
        let dt = 1e-3;
        let n = 4001;
        let f: Vec<f64> = (0..n).map(|i| (-(i as f64) * dt).exp()).collect();
        let mu: Vec<f64> = f.iter().map(|&v| c * v).collect();
        let input = RenewalInput { f, mu, dt };
        let m = solve_renewal(&input).unwrap();
        for &t in &[1.0f64, 2.0, 4.0] {
            let i = (t / dt).round() as usize;
            let expect = ((c - 1.0) * t).exp();
            assert!(
                (m[i] - expect).abs() < 50.0 * dt * dt * expect.max(1.0) + 1e-9,
                "t={t}: {} vs {expect}",
                m[i]
            );
        }
    }

    #[test]
    fn tail_ratio_matches_prediction_for_supercritical_kernel() {
        // mu = c e^{-t} with c > 1: Malthusian alpha solves
        // ∫ e^{-alpha s} mu(ds) = c/(1+alpha) = 1, so alpha = c - 1.
        let c = 1.5;
        let alpha: f64 = c - 1.0;
        let dt = 2e-3;
        let horizon: f64 = 45.0 / alpha.max(1.0);
        let n = (horizon / dt) as usize + 1;
        let f: Vec<f64> = (0..n).map(|i| (-(i as f64) * dt).exp()).collect();
        let mu: Vec<f64> = f.iter().map(|&v| c * v).collect();
        let input = RenewalInput { f, mu, dt };
        let m = solve_renewal(&input).unwrap();
        let r = asymptotic_ratios(&m, alpha, &input).unwrap();
        assert!(
            (r.tail_ratio - r.predicted).abs() < 1e-3 * r.predicted,
            "{} vs {}",
            r.tail_ratio,
            r.predicted
        );
    }

    #[test]
    fn negative_alpha_is_rejected() {
        let input = RenewalInput { f: vec![1.0, 1.0], mu: vec![0.0, 0.0], dt: 1.0 };
        let m = solve_renewal(&input).unwrap();
        assert!(asymptotic_ratios(&m, 0.0, &input).is_err());
    }

    #[test]
    fn critical_cesaro_mean_converges() {
        // Critical kernel: total mass of mu equals 1; the time average of m
        // tends to ∫f / ∫ s mu(ds). Take mu = e^{-t} (mass 1, mean 1), f = e^{-t}.
        let dt = 2e-3;
        let n = 60_001; // T = 120
        let f: Vec<f64> = (0..n).map(|i| (-(i as f64) * dt).exp()).collect();
        let mu = f.clone();
        let input = RenewalInput { f, mu, dt };
        let m = solve_renewal(&input).unwrap();
        let avg = cesaro_mean(&m, dt);
        assert!((avg - 1.0).abs() < 0.02, "cesaro mean {avg}");
    }
}
