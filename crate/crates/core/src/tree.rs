//! The full branching island model: a root island plus recursively
//! colonized offspring islands, each carrying a diffusion excursion.
//!
//! Offspring whose excursion never reaches the visibility threshold
//! `epsilon` are not instantiated (the excursion measure has infinite
//! total mass); visible colonizations occur at rate `a(χ) / S(epsilon)`
//! along every alive island, generated exactly on the discretized path by
//! Poisson thinning against the linear bound `a(χ) <= c2 χ`.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::excursion::{sample_excursion, Excursion};
use crate::rng::{child_stream, stream_rng};
use crate::scale::ScaleTable;
use crate::sde::{simulate_path, DiffusionPath};

/// One island of the tree.
#[derive(Debug, Clone)]
pub struct IslandNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Colonization time; `0` for the root.
    pub birth_time: f64,
    pub generation: u32,
    /// Mass trajectory in island-local time (lag since `birth_time`).
    pub path: DiffusionPath,
    /// Absorption lag of the island path, when observed.
    pub lifetime: Option<f64>,
    /// RNG stream key; derived from the parent's key, so the tree content
    /// is independent of traversal order.
    pub stream: u64,
}

impl IslandNode {
    pub fn max_mass(&self) -> f64 {
        self.path.values.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct IslandTree {
    pub nodes: Vec<IslandNode>,
    pub epsilon: f64,
    pub dt: f64,
    pub horizon: f64,
    pub x0: f64,
    /// Importance weight of the whole tree: `1` for mass-rooted trees,
    /// `1/S(epsilon)` for excursion-rooted trees.
    pub weight: f64,
    /// True when the node cap stopped the recursion; the stored tree is
    /// the deterministic breadth-first prefix.
    pub capped: bool,
}

/// Random characteristic used when counting the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Characteristic {
    /// φ(t, χ) = χ_t.
    TotalMass,
    /// φ(t, χ) = χ_t · 1{t <= t0}.
    Window(f64),
    /// φ(t, χ) = ∫_t^∞ χ_s ds.
    TailArea,
}

/// Tuning knobs for tree simulation.
#[derive(Debug, Clone, Copy)]
pub struct TreeBudget {
    pub node_cap: usize,
    pub retry_cap: u32,
}

impl Default for TreeBudget {
    fn default() -> Self {
        Self { node_cap: 1_000_000, retry_cap: crate::excursion::DEFAULT_RETRY_CAP }
    }
}

/// Simulates one tree whose root carries the diffusion started at `x0`.
pub fn simulate_tree(
    table: &ScaleTable<f64>,
    x0: f64,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    stream: u64,
    budget: TreeBudget,
) -> Result<IslandTree> {
    if !(x0 >= 0.0) {
        return Err(Error::Domain(format!("x0 {x0} must be nonnegative")));
    }
    let root_stream = child_stream(stream, 0);
    let root_path = simulate_path(table.coeffs(), x0, dt, horizon, seed, root_stream)?;
    let lifetime = root_path.absorption_time;
    let root = IslandNode {
        id: 0,
        parent: None,
        birth_time: 0.0,
        generation: 0,
        path: root_path,
        lifetime,
        stream: root_stream,
    };
    grow(table, root, x0, epsilon, dt, horizon, seed, 1.0, budget)
}

/// Simulates one tree whose root is itself a visible excursion; the tree
/// weight is the root's excursion weight `1/S(epsilon)`.
pub fn simulate_excursion_tree(
    table: &ScaleTable<f64>,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    stream: u64,
    budget: TreeBudget,
) -> Result<IslandTree> {
    let root_stream = child_stream(stream, 0);
    let exc = sample_excursion(table, epsilon, dt, horizon, seed, root_stream, budget.retry_cap)?;
    let weight = exc.weight;
    let lifetime = exc.lifetime;
    let root = IslandNode {
        id: 0,
        parent: None,
        birth_time: 0.0,
        generation: 0,
        path: exc.path,
        lifetime,
        stream: root_stream,
    };
    grow(table, root, 0.0, epsilon, dt, horizon, seed, weight, budget)
}

/// Grows a tree from `root` until extinction, the horizon, or the cap.
#[allow(clippy::too_many_arguments)]
fn grow(
    table: &ScaleTable<f64>,
    root: IslandNode,
    x0: f64,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    weight: f64,
    budget: TreeBudget,
) -> Result<IslandTree> {
    let coeffs = table.coeffs();
    let (_c1, c2) = coeffs.linear_bounds();
    let s_eps = table.big_s(epsilon)?;
    let mut nodes = vec![root];
    let mut frontier = vec![0usize];
    let mut capped = false;

    'waves: while !frontier.is_empty() {
        // Breadth-first by birth time: deterministic regardless of how the
        // previous wave was executed.
        frontier.sort_by(|&a, &b| {
            nodes[a]
                .birth_time
                .total_cmp(&nodes[b].birth_time)
                .then(a.cmp(&b))
        });
        let mut next = Vec::new();
        for wave_idx in 0..frontier.len() {
            let pid = frontier[wave_idx];
            let parent_birth = nodes[pid].birth_time;
            let parent_gen = nodes[pid].generation;
            let parent_stream = nodes[pid].stream;
            let events = colonization_times(
                coeffs,
                &nodes[pid].path,
                parent_birth,
                horizon,
                c2,
                s_eps,
                seed,
                parent_stream,
            )?;
            for (event_idx, sigma) in events.into_iter().enumerate() {
                let remaining = horizon - sigma;
                if remaining <= 2.0 * dt {
                    continue;
                }
                if nodes.len() >= budget.node_cap {
                    capped = true;
                    break 'waves;
                }
                let child_stream_id = child_stream(parent_stream, 2 + event_idx as u64);
                let exc = sample_excursion(
                    table,
                    epsilon,
                    dt,
                    remaining,
                    seed,
                    child_stream_id,
                    budget.retry_cap,
                )?;
                let id = nodes.len();
                nodes.push(IslandNode {
                    id,
                    parent: Some(pid),
                    birth_time: sigma,
                    generation: parent_gen + 1,
                    lifetime: exc.lifetime,
                    path: exc.path,
                    stream: child_stream_id,
                });
                next.push(id);
            }
        }
        frontier = next;
    }

    Ok(IslandTree { nodes, epsilon, dt, horizon, x0, weight, capped })
}

/// Visible colonization times along one island path, in absolute time.
///
/// On each dt cell the mass is frozen at its left endpoint, so the exact
/// event law is Poisson with rate `a(χ)/S(ε)`; candidates are drawn at the
/// bound rate `c2 χ / S(ε)` and thinned with probability `a(χ)/(c2 χ)`.
#[allow(clippy::too_many_arguments)]
fn colonization_times(
    coeffs: &crate::coeffs::Coeffs<f64>,
    path: &DiffusionPath,
    birth_time: f64,
    horizon: f64,
    c2: f64,
    s_eps: f64,
    seed: u64,
    node_stream: u64,
) -> Result<Vec<f64>> {
    let mut rng: ChaCha8Rng = stream_rng(seed, child_stream(node_stream, 1));
    let dt = path.dt;
    let hull = coeffs.eval_hull();
    let mut times = Vec::new();
    for (i, &chi) in path.values.iter().enumerate() {
        if chi <= 0.0 {
            continue;
        }
        let t_cell = birth_time + i as f64 * dt;
        if t_cell >= horizon {
            break;
        }
        let bound = c2 * chi / s_eps;
        if !(bound > 0.0) || !bound.is_finite() {
            continue;
        }
        let n = Poisson::new(bound * dt)
            .map_err(|e| Error::Numerical(format!("poisson rate failed: {e}")))?
            .sample(&mut rng) as u64;
        if n == 0 {
            continue;
        }
        let a = coeffs.a(chi.min(hull));
        let accept_p = (a / (c2 * chi)).clamp(0.0, 1.0);
        for _ in 0..n {
            let u: f64 = rng.random();
            let keep: f64 = rng.random();
            if keep < accept_p {
                let t = t_cell + u * dt;
                if t < horizon {
                    times.push(t);
                }
            }
        }
    }
    times.sort_by(f64::total_cmp);
    Ok(times)
}

/// Lag-domain value of the characteristic for one node path.
fn phi(path: &DiffusionPath, suffix: Option<&[f64]>, ch: Characteristic, lag: f64) -> f64 {
    if lag < 0.0 {
        return 0.0;
    }
    match ch {
        Characteristic::TotalMass => path.value_at(lag),
        Characteristic::Window(t0) => {
            if lag <= t0 {
                path.value_at(lag)
            } else {
                0.0
            }
        }
        Characteristic::TailArea => {
            let suffix = suffix.expect("suffix areas prepared for TailArea");
            let pos = lag / path.dt;
            let i = pos.floor() as usize;
            if i + 1 >= suffix.len() {
                return 0.0;
            }
            let frac = pos - i as f64;
            suffix[i] * (1.0 - frac) + suffix[i + 1] * frac
        }
    }
}

fn suffix_areas(path: &DiffusionPath) -> Vec<f64> {
    let n = path.values.len();
    let mut out = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = out[i + 1] + 0.5 * (path.values[i] + path.values[i + 1]) * path.dt;
    }
    out
}

/// The population `V^φ_t = Σ_ι φ(t − σ_ι, χ^ι)` on the given time grid.
pub fn total_mass_curve(tree: &IslandTree, ch: Characteristic, grid: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for node in &tree.nodes {
        let suffix = if ch == Characteristic::TailArea {
            Some(suffix_areas(&node.path))
        } else {
            None
        };
        for (k, &t) in grid.iter().enumerate() {
            out[k] += phi(&node.path, suffix.as_deref(), ch, t - node.birth_time);
        }
    }
    out
}

/// Exact trapezoid value of `∫_0^{t_end} V_t dt` from the node paths.
pub fn tree_area(tree: &IslandTree, t_end: f64) -> f64 {
    let mut acc = 0.0;
    for node in &tree.nodes {
        let u_max = t_end - node.birth_time;
        if u_max <= 0.0 {
            continue;
        }
        let dt = node.path.dt;
        let vals = &node.path.values;
        for i in 1..vals.len() {
            let t1 = i as f64 * dt;
            if t1 <= u_max {
                acc += 0.5 * (vals[i - 1] + vals[i]) * dt;
            } else {
                let t0 = t1 - dt;
                let frac = (u_max - t0) / dt;
                let v_end = vals[i - 1] * (1.0 - frac) + vals[i] * frac;
                acc += 0.5 * (vals[i - 1] + v_end) * (u_max - t0);
                break;
            }
        }
    }
    acc
}

/// Number of colonization events recorded in the tree.
pub fn total_emigration(tree: &IslandTree) -> usize {
    tree.nodes.len() - 1
}

/// Ensemble summary of the extinction experiment.
#[derive(Debug, Clone, Copy)]
pub struct ExtinctionSummary {
    pub survival_frequency: f64,
    pub survival_se: f64,
    pub mean_area: f64,
    pub area_se: f64,
    /// Least-squares slope of `log V_t` over the last half of `[0, t_end]`
    /// on the surviving sub-ensemble; absent without usable survivors.
    pub growth_fit: Option<f64>,
}

/// Classifies survival (`V_T > delta`; capped trees count as survivors,
/// their population already exceeds any practical threshold), averages the
/// total area, and fits the exponential growth rate on survivors.
pub fn extinction_experiment(
    trees: &[IslandTree],
    t_end: f64,
    delta: f64,
) -> Result<ExtinctionSummary> {
    if trees.is_empty() {
        return Err(Error::Domain("extinction experiment needs a nonempty ensemble".into()));
    }
    let n = trees.len() as f64;
    let survive: Vec<bool> = trees
        .par_iter()
        .map(|tr| {
            tr.capped || total_mass_curve(tr, Characteristic::TotalMass, &[t_end])[0] > delta
        })
        .collect();
    let p = survive.iter().filter(|&&s| s).count() as f64 / n;
    let survival_se = (p * (1.0 - p) / n).sqrt();

    let areas: Vec<f64> = trees.par_iter().map(|tr| tree_area(tr, t_end)).collect();
    let mean_area: f64 = areas.iter().sum::<f64>() / n;
    let var: f64 = areas.iter().map(|a| (a - mean_area).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let area_se = (var / n).sqrt();

    let survivors: Vec<&IslandTree> = trees
        .iter()
        .zip(&survive)
        .filter(|(tr, &s)| s && !tr.capped)
        .map(|(tr, _)| tr)
        .collect();
    let growth_fit = fit_growth(&survivors, t_end);

    Ok(ExtinctionSummary { survival_frequency: p, survival_se, mean_area, area_se, growth_fit })
}

fn fit_growth(survivors: &[&IslandTree], t_end: f64) -> Option<f64> {
    if survivors.len() < 5 {
        return None;
    }
    let grid: Vec<f64> = (0..=24)
        .map(|k| 0.5 * t_end + 0.5 * t_end * k as f64 / 24.0)
        .collect();
    let mut mean = vec![0.0; grid.len()];
    for tr in survivors {
        let v = total_mass_curve(tr, Characteristic::TotalMass, &grid);
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let n = survivors.len() as f64;
    let pairs: Vec<(f64, f64)> = grid.iter().zip(&mean).map(|(&t, &m)| (t, m / n)).collect();
    fit_log_slope(&pairs)
}

/// Small per-tree digest so ensembles never retain full trees in memory.
#[derive(Debug, Clone)]
pub struct TreeSummary {
    pub capped: bool,
    pub n_nodes: usize,
    /// V_{t_end} with the TotalMass characteristic.
    pub v_end: f64,
    /// ∫_0^{t_end} V dt.
    pub area: f64,
    /// TotalMass curve on the caller's grid.
    pub curve: Vec<f64>,
}

/// Digests one tree for ensemble statistics.
pub fn summarize(tree: &IslandTree, t_end: f64, grid: &[f64]) -> TreeSummary {
    TreeSummary {
        capped: tree.capped,
        n_nodes: tree.nodes.len(),
        v_end: total_mass_curve(tree, Characteristic::TotalMass, &[t_end])[0],
        area: tree_area(tree, t_end),
        curve: total_mass_curve(tree, Characteristic::TotalMass, grid),
    }
}

/// Simulates `n` mass-rooted trees and maps each through `f` immediately,
/// so only the mapped values are retained.
#[allow(clippy::too_many_arguments)]
pub fn map_ensemble<T: Send>(
    table: &ScaleTable<f64>,
    x0: f64,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    base_stream: u64,
    n: usize,
    budget: TreeBudget,
    f: impl Fn(&IslandTree) -> T + Sync,
) -> Result<Vec<T>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let tree = simulate_tree(
                table,
                x0,
                epsilon,
                dt,
                horizon,
                seed,
                child_stream(base_stream, i as u64),
                budget,
            )?;
            Ok(f(&tree))
        })
        .collect()
}

/// Excursion-rooted counterpart of [`map_ensemble`].
#[allow(clippy::too_many_arguments)]
pub fn map_excursion_ensemble<T: Send>(
    table: &ScaleTable<f64>,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    base_stream: u64,
    n: usize,
    budget: TreeBudget,
    f: impl Fn(&IslandTree) -> T + Sync,
) -> Result<Vec<T>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let tree = simulate_excursion_tree(
                table,
                epsilon,
                dt,
                horizon,
                seed,
                child_stream(base_stream, i as u64),
                budget,
            )?;
            Ok(f(&tree))
        })
        .collect()
}

/// Ensemble statistics from per-tree digests (same classification rules as
/// [`extinction_experiment`]).
pub fn extinction_from_summaries(
    summaries: &[TreeSummary],
    t_end: f64,
    delta: f64,
    grid: &[f64],
) -> Result<ExtinctionSummary> {
    if summaries.is_empty() {
        return Err(Error::Domain("extinction experiment needs a nonempty ensemble".into()));
    }
    let n = summaries.len() as f64;
    let survive: Vec<bool> = summaries.iter().map(|s| s.capped || s.v_end > delta).collect();
    let p = survive.iter().filter(|&&s| s).count() as f64 / n;
    let survival_se = (p * (1.0 - p) / n).sqrt();
    let mean_area: f64 = summaries.iter().map(|s| s.area).sum::<f64>() / n;
    let var: f64 = summaries
        .iter()
        .map(|s| (s.area - mean_area).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let area_se = (var / n).sqrt();

    // Growth fit on the mean survivor curve over the last half of [0, t_end].
    let survivors: Vec<&TreeSummary> = summaries
        .iter()
        .zip(&survive)
        .filter(|(s, &alive)| alive && !s.capped)
        .map(|(s, _)| s)
        .collect();
    let growth_fit = if survivors.len() >= 5 && !grid.is_empty() {
        let mut mean = vec![0.0; grid.len()];
        for s in &survivors {
            for (m, v) in mean.iter_mut().zip(&s.curve) {
                *m += v;
            }
        }
        let pairs: Vec<(f64, f64)> = grid
            .iter()
            .zip(&mean)
            .filter(|(&t, _)| t >= 0.5 * t_end)
            .map(|(&t, &m)| (t, m / survivors.len() as f64))
            .collect();
        fit_log_slope(&pairs)
    } else {
        None
    };

    Ok(ExtinctionSummary { survival_frequency: p, survival_se, mean_area, area_se, growth_fit })
}

fn fit_log_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 4 || pairs.iter().any(|&(_, v)| v <= 0.0) {
        return None;
    }
    let n = pairs.len() as f64;
    let tbar = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = pairs.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxy: f64 = pairs.iter().map(|&(t, v)| (t - tbar) * (v.ln() - ybar)).sum();
    let sxx: f64 = pairs.iter().map(|&(t, _)| (t - tbar).powi(2)).sum();
    Some(sxy / sxx)
}

/// Simulates an ensemble of mass-rooted trees on independent streams.
#[allow(clippy::too_many_arguments)]
pub fn simulate_ensemble(
    table: &ScaleTable<f64>,
    x0: f64,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    base_stream: u64,
    n: usize,
    budget: TreeBudget,
) -> Result<Vec<IslandTree>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            simulate_tree(
                table,
                x0,
                epsilon,
                dt,
                horizon,
                seed,
                child_stream(base_stream, i as u64),
                budget,
            )
        })
        .collect()
}

/// Simulates an ensemble of excursion-rooted trees on independent streams.
#[allow(clippy::too_many_arguments)]
pub fn simulate_excursion_ensemble(
    table: &ScaleTable<f64>,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    base_stream: u64,
    n: usize,
    budget: TreeBudget,
) -> Result<Vec<IslandTree>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            simulate_excursion_tree(
                table,
                epsilon,
                dt,
                horizon,
                seed,
                child_stream(base_stream, i as u64),
                budget,
            )
        })
        .collect()
}

/// Keeps one weighted excursion handy for callers that need the root law.
pub fn root_excursion(tree: &IslandTree) -> Option<Excursion> {
    if tree.x0 != 0.0 {
        return None;
    }
    let root = &tree.nodes[0];
    Some(Excursion {
        epsilon: tree.epsilon,
        path: root.path.clone(),
        t_eps: 0.0,
        lifetime: root.lifetime,
        weight: tree.weight,
        truncated: root.lifetime.is_none(),
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
    fn zero_start_gives_single_silent_root() {
        let t = feller_table();
        let tree = simulate_tree(&t, 0.0, 0.5, 1e-3, 10.0, 1, 0, TreeBudget::default()).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.nodes[0].path.values, vec![0.0]);
        let curve = total_mass_curve(&tree, Characteristic::TotalMass, &[0.0, 1.0, 5.0]);
        assert!(curve.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn initial_total_mass_is_x0() {
        let t = feller_table();
        let tree = simulate_tree(&t, 1.5, 0.5, 1e-3, 5.0, 2, 0, TreeBudget::default()).unwrap();
        let v0 = total_mass_curve(&tree, Characteristic::TotalMass, &[0.0])[0];
        assert_eq!(v0, 1.5);
        assert_eq!(tree.nodes[0].generation, 0);
        assert_eq!(tree.nodes[0].birth_time, 0.0);
    }

    #[test]
    fn window_with_infinite_cutoff_equals_total_mass() {
        let t = feller_table();
        let tree = simulate_tree(&t, 1.0, 0.4, 2e-3, 15.0, 3, 1, TreeBudget::default()).unwrap();
        let grid: Vec<f64> = (0..=30).map(|k| k as f64 * 0.5).collect();
        let a = total_mass_curve(&tree, Characteristic::TotalMass, &grid);
        let b = total_mass_curve(&tree, Characteristic::Window(f64::INFINITY), &grid);
        assert_eq!(a, b);
    }

    #[test]
    fn children_are_born_while_parent_is_alive() {
        let t = feller_table();
        for stream in 0..20 {
            let tree =
                simulate_tree(&t, 1.0, 0.3, 2e-3, 20.0, 5, stream, TreeBudget::default()).unwrap();
            for node in &tree.nodes[1..] {
                let p = &tree.nodes[node.parent.unwrap()];
                assert_eq!(node.generation, p.generation + 1);
                assert!(node.birth_time >= p.birth_time);
                let p_end = p.birth_time + p.path.end_time();
                assert!(node.birth_time <= p_end + 1e-9);
            }
        }
    }

    #[test]
    fn node_cap_yields_capped_prefix() {
        // Supercritical family: the cap triggers and the prefix is reproducible.
        let c = CoefficientSet::<f64>::logistic_feller(1.0, 1.0, 2.0, 1.0)
            .with_domain_cap(1e4)
            .build()
            .unwrap();
        let t = build_scale_table(&c, GridSpec::default()).unwrap();
        let budget = TreeBudget { node_cap: 40, retry_cap: 100 };
        let mut seen_cap = false;
        for stream in 0..10 {
            let tree = simulate_tree(&t, 2.0, 0.3, 2e-3, 40.0, 8, stream, budget).unwrap();
            if tree.capped {
                seen_cap = true;
                assert_eq!(tree.nodes.len(), 40);
                let again = simulate_tree(&t, 2.0, 0.3, 2e-3, 40.0, 8, stream, budget).unwrap();
                assert_eq!(again.nodes.len(), tree.nodes.len());
                assert_eq!(
                    again.nodes.last().unwrap().path.values,
                    tree.nodes.last().unwrap().path.values
                );
            }
        }
        assert!(seen_cap);
    }

    #[test]
    fn first_generation_count_matches_occupation_formula() {
        // E[#gen-1 children] = E∫a(Y)dt / S(eps) = 1 / (e^eps - 1) for this family.
        let t = feller_table();
        let eps = 0.5;
        let n = 1200;
        let trees =
            simulate_ensemble(&t, 1.0, eps, 2e-3, 40.0, 21, 0, n, TreeBudget::default()).unwrap();
        let counts: Vec<f64> = trees
            .iter()
            .map(|tr| tr.nodes.iter().filter(|nd| nd.generation == 1).count() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        let expect = 1.0 / ((eps as f64).exp() - 1.0);
        assert!(
            (mean - expect).abs() < 3.0 * se + 0.03 * expect,
            "mean {mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        assert!(extinction_experiment(&[], 1.0, 1e-3).is_err());
    }
}
