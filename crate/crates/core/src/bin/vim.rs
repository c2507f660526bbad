//! Batch front door: parses a run configuration, orchestrates the
//! requested experiment, and persists reproducible outputs (CSV + JSON)
//! together with a checksummed manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use virgin_island::checks::{run_all, SuiteConfig};
use virgin_island::coeffs::{validate_assumptions, CoefficientSet, Coeffs, Family};
use virgin_island::error::Error;
use virgin_island::excursion::{estimate_fq_curve, sample_ensemble};
use virgin_island::renewal::{asymptotic_ratios, solve_renewal, RenewalInput};
use virgin_island::rng::child_stream;
use virgin_island::scale::{analyze, build_scale_table, GridSpec, ScaleTable};
use virgin_island::sde::simulate_path;
use virgin_island::tree::{
    extinction_from_summaries, map_ensemble, simulate_tree, summarize, total_mass_curve,
    Characteristic, TreeBudget,
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    model: Family<f64>,
    analysis: AnalysisConfig,
    mc: McConfig,
    excursion: ExcursionConfig,
    tree: TreeConfig,
    /// Default output directory; `--out` overrides it.
    outputs: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalysisConfig {
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_domain_cap")]
    domain_cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct McConfig {
    /// Mandatory: runs never draw entropy from the environment.
    seed: u64,
    n_paths: usize,
    dt: f64,
    horizon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExcursionConfig {
    /// Visibility thresholds, strictly decreasing.
    epsilon: Vec<f64>,
    #[serde(default = "default_start_eps_factor")]
    start_eps_factor: f64,
    #[serde(default = "default_retry_cap")]
    retry_cap: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeConfig {
    x0: f64,
    #[serde(default = "default_node_cap")]
    node_cap: usize,
    /// Extinction threshold; defaults to 1e-3 * x0.
    #[serde(default)]
    delta: Option<f64>,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_domain_cap() -> f64 {
    virgin_island::coeffs::DEFAULT_DOMAIN_CAP
}
fn default_start_eps_factor() -> f64 {
    virgin_island::excursion::START_EPS_FACTOR
}
fn default_retry_cap() -> u32 {
    virgin_island::excursion::DEFAULT_RETRY_CAP
}
fn default_node_cap() -> usize {
    1_000_000
}

impl RunConfig {
    fn validate(&self) -> Result<(), Error> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.mc.dt > 0.0) {
            return bad("mc.dt must be positive");
        }
        if !(self.mc.horizon > 0.0) {
            return bad("mc.horizon must be positive");
        }
        if self.mc.n_paths == 0 {
            return bad("mc.n_paths must be at least 1");
        }
        if !(self.analysis.tol > 0.0) {
            return bad("analysis.tol must be positive");
        }
        if !(self.analysis.domain_cap > 0.0) {
            return bad("analysis.domain_cap must be positive");
        }
        if self.excursion.epsilon.is_empty() {
            return bad("excursion.epsilon must list at least one threshold");
        }
        if self
            .excursion
            .epsilon
            .windows(2)
            .any(|w| !(w[1] < w[0]))
        {
            return bad("excursion.epsilon must be strictly decreasing");
        }
        if self.excursion.epsilon.iter().any(|&e| !(e > 0.0)) {
            return bad("excursion.epsilon entries must be positive");
        }
        if !(self.excursion.start_eps_factor > 0.0 && self.excursion.start_eps_factor < 1.0) {
            return bad("excursion.start_eps_factor must lie in (0, 1)");
        }
        if !(self.tree.x0 >= 0.0) {
            return bad("tree.x0 must be nonnegative");
        }
        if self.tree.node_cap == 0 {
            return bad("tree.node_cap must be at least 1");
        }
        if let Some(d) = self.tree.delta {
            if !(d > 0.0) {
                return bad("tree.delta must be positive when given");
            }
        }
        Ok(())
    }

    fn delta(&self) -> f64 {
        self.tree.delta.unwrap_or(1e-3 * self.tree.x0.max(1e-6))
    }

    fn coeffs(&self) -> Result<Coeffs<f64>, Error> {
        CoefficientSet {
            family: self.model.clone(),
            domain_cap: self.analysis.domain_cap,
        }
        .build()
    }

    fn grid_spec(&self) -> GridSpec<f64> {
        GridSpec {
            tol: self.analysis.tol,
            ..GridSpec::default()
        }
    }
}

// ---------------------------------------------------------------------------
// CLI surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "vim", version, about = "Virgin island model toolkit")]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `outputs`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override (highest precedence, above VIM_SEED and the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Deterministic regime analysis: criterion, growth rate, survival.
    Analyze,
    /// Monte Carlo ensemble of diffusion paths.
    SimulatePaths,
    /// Weighted excursion ensembles, one per configured threshold.
    SimulateExcursions,
    /// Island-tree ensemble with extinction summary.
    SimulateTree,
    /// Estimate the renewal inputs from excursions and solve for the mean.
    Renewal,
    /// Cross-oracle verification suite.
    Verify,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_ASSUMPTION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_VERIFY: u8 = 5;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Precondition(_) => EXIT_ASSUMPTION,
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Resource(_) => EXIT_RESOURCE,
    }
}

fn emit_error(kind: &str, message: &str, code: u8) -> ExitCode {
    // One machine-parsable JSON line on stderr per error.
    let line = serde_json::json!({
        "error": { "kind": kind, "message": message, "exit_code": code }
    });
    eprintln!("{line}");
    ExitCode::from(code)
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ManifestFile {
    name: String,
    sha256: String,
    /// Marks outputs truncated by a resource guard.
    partial: bool,
}

#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    config_sha256: String,
    seed: u64,
    /// Where the effective seed came from: "config", "env" or "flag".
    seed_source: String,
    started_unix: f64,
    finished_unix: f64,
    partial: bool,
    files: Vec<ManifestFile>,
}

struct OutputSink {
    dir: PathBuf,
    files: Vec<ManifestFile>,
    partial: bool,
}

impl OutputSink {
    fn new(dir: &Path) -> Result<Self, Error> {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Config(format!("cannot create output dir {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), partial: false })
    }

    /// Atomic write: temp file in the target directory, then rename.
    fn write(&mut self, name: &str, bytes: &[u8], partial: bool) -> Result<(), Error> {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let path = self.dir.join(name);
        fs::write(&tmp, bytes)
            .map_err(|e| Error::Io(e))?;
        fs::rename(&tmp, &path).map_err(Error::Io)?;
        self.files.push(ManifestFile {
            name: name.to_string(),
            sha256: hex_digest(bytes),
            partial,
        });
        self.partial |= partial;
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Error> {
        let mut body = serde_json::to_vec_pretty(value)
            .map_err(|e| Error::Numerical(format!("serialize {name}: {e}")))?;
        body.push(b'\n');
        self.write(name, &body, false)
    }

    fn finish(
        mut self,
        config_hash: &str,
        seed: u64,
        seed_source: &str,
        started: f64,
    ) -> Result<bool, Error> {
        let partial = self.partial;
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config_hash.to_string(),
            seed,
            seed_source: seed_source.to_string(),
            started_unix: started,
            finished_unix: now_unix(),
            partial,
            files: std::mem::take(&mut self.files),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(partial)
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// CSV cell formatting: '.' decimal separator, shortest round-trip form.
fn csv_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::from("nan")
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct Ctx {
    cfg: RunConfig,
    coeffs: Coeffs<f64>,
    seed: u64,
    seed_source: String,
    quiet: bool,
}

impl Ctx {
    fn table(&self) -> Result<ScaleTable<f64>, Error> {
        build_scale_table(&self.coeffs, self.cfg.grid_spec())
    }

    fn say(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

fn cmd_analyze(ctx: &Ctx, sink: &mut OutputSink) -> Result<(), Error> {
    let report_assumptions = validate_assumptions(&ctx.coeffs, ctx.cfg.analysis.tol)?;
    sink.write_json("assumption_report.json", &report_assumptions)?;
    if !report_assumptions.all_core_ok() {
        return Err(Error::Precondition(
            "model assumptions violated; see assumption_report.json".into(),
        ));
    }
    let report = analyze(&ctx.coeffs, ctx.cfg.tree.x0.max(1e-12), ctx.cfg.grid_spec())?;
    sink.write_json("report.json", &report)?;
    ctx.say(&format!(
        "theta={:.6} regime={}",
        report.theta, report.regime
    ));
    Ok(())
}

fn cmd_simulate_paths(ctx: &Ctx, sink: &mut OutputSink) -> Result<(), Error> {
    use rayon::prelude::*;
    let mc = &ctx.cfg.mc;
    let paths: Vec<_> = (0..mc.n_paths)
        .into_par_iter()
        .map(|i| {
            simulate_path(
                &ctx.coeffs,
                ctx.cfg.tree.x0,
                mc.dt,
                mc.horizon,
                ctx.seed,
                child_stream(1, i as u64),
            )
        })
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("path_id,t,value\n");
    for (i, p) in paths.iter().enumerate() {
        for (k, v) in p.values.iter().enumerate() {
            csv.push_str(&format!("{i},{},{}\n", csv_num(k as f64 * p.dt), csv_num(*v)));
        }
    }
    sink.write("paths.csv", csv.as_bytes(), false)?;

    // Ensemble mean curve with standard errors on the shared grid.
    let n_steps = (mc.horizon / mc.dt).ceil() as usize;
    let mut mean_csv = String::from("t,mean,se\n");
    for k in 0..=n_steps {
        let t = k as f64 * mc.dt;
        let vals: Vec<f64> = paths.iter().map(|p| p.value_at(t)).collect();
        let m: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
        let var: f64 =
            vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() as f64 - 1.0).max(1.0);
        let se = (var / vals.len() as f64).sqrt();
        mean_csv.push_str(&format!("{},{},{}\n", csv_num(t), csv_num(m), csv_num(se)));
    }
    sink.write("mean_curve.csv", mean_csv.as_bytes(), false)?;

    let absorbed = paths.iter().filter(|p| p.absorption_time.is_some()).count();
    sink.write_json(
        "paths_meta.json",
        &serde_json::json!({
            "n_paths": mc.n_paths,
            "dt": mc.dt,
            "horizon": mc.horizon,
            "x0": ctx.cfg.tree.x0,
            "absorbed_fraction": absorbed as f64 / mc.n_paths as f64,
        }),
    )?;
    ctx.say(&format!("simulated {} paths, {absorbed} absorbed", mc.n_paths));
    Ok(())
}

fn cmd_simulate_excursions(ctx: &Ctx, sink: &mut OutputSink) -> Result<(), Error> {
    let table = ctx.table()?;
    let mc = &ctx.cfg.mc;
    let mut meta = Vec::new();
    for (k, &eps) in ctx.cfg.excursion.epsilon.iter().enumerate() {
        let samples = sample_ensemble(
            &table,
            eps,
            mc.dt,
            mc.horizon,
            ctx.seed,
            child_stream(2, k as u64),
            mc.n_paths,
            ctx.cfg.excursion.retry_cap,
        )?;
        let mut csv = String::from("excursion_id,t,value\n");
        for (i, e) in samples.iter().enumerate() {
            for (j, v) in e.path.values.iter().enumerate() {
                csv.push_str(&format!(
                    "{i},{},{}\n",
                    csv_num(j as f64 * e.path.dt),
                    csv_num(*v)
                ));
            }
        }
        let name = format!("excursions_{k}.csv");
        sink.write(&name, csv.as_bytes(), false)?;
        meta.push(serde_json::json!({
            "file": name,
            "epsilon": eps,
            "weight": samples[0].weight,
            "n": samples.len(),
            "truncated": samples.iter().filter(|e| e.truncated).count(),
        }));
        ctx.say(&format!("epsilon={eps}: {} excursions", samples.len()));
    }
    sink.write_json(
        "excursions_meta.json",
        &serde_json::json!({ "seed": ctx.seed, "ensembles": meta }),
    )?;
    Ok(())
}

fn cmd_simulate_tree(ctx: &Ctx, sink: &mut OutputSink) -> Result<(), Error> {
    let table = ctx.table()?;
    let mc = &ctx.cfg.mc;
    let eps = *ctx.cfg.excursion.epsilon.last().unwrap();
    let budget = TreeBudget {
        node_cap: ctx.cfg.tree.node_cap,
        retry_cap: ctx.cfg.excursion.retry_cap,
    };
    // Ensembles are reduced to per-tree summaries on the fly; full trees can
    // hold every node path and exhaust memory at large node caps.
    let fit_grid: Vec<f64> = (0..=24)
        .map(|k| 0.5 * mc.horizon + 0.5 * mc.horizon * k as f64 / 24.0)
        .collect();
    let summaries = map_ensemble(
        &table,
        ctx.cfg.tree.x0,
        eps,
        mc.dt,
        mc.horizon,
        ctx.seed,
        3,
        mc.n_paths,
        budget,
        |tr| summarize(tr, mc.horizon, &fit_grid),
    )?;
    let capped_count = summaries.iter().filter(|s| s.capped).count();
    let any_capped = capped_count > 0;

    // Full node table for the first tree of the ensemble (same stream the
    // ensemble assigns to index 0, so it is that tree).
    let show = simulate_tree(
        &table,
        ctx.cfg.tree.x0,
        eps,
        mc.dt,
        mc.horizon,
        ctx.seed,
        child_stream(3, 0),
        budget,
    )?;
    let show = &show;
    let mut csv = String::from("node_id,parent_id,birth_time,generation,excursion_max,lifetime\n");
    for nd in &show.nodes {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            nd.id,
            nd.parent.map(|p| p.to_string()).unwrap_or_default(),
            csv_num(nd.birth_time),
            nd.generation,
            csv_num(nd.max_mass()),
            nd.lifetime.map(csv_num).unwrap_or_default(),
        ));
    }
    sink.write("tree.csv", csv.as_bytes(), show.capped)?;

    let n_grid = 400usize;
    let grid: Vec<f64> = (0..=n_grid)
        .map(|i| mc.horizon * i as f64 / n_grid as f64)
        .collect();
    let curve = total_mass_curve(show, Characteristic::TotalMass, &grid);
    let mut mass_csv = String::from("t,V\n");
    for (t, v) in grid.iter().zip(curve) {
        mass_csv.push_str(&format!("{},{}\n", csv_num(*t), csv_num(v)));
    }
    sink.write("mass_curve.csv", mass_csv.as_bytes(), show.capped)?;

    let summary = extinction_from_summaries(&summaries, mc.horizon, ctx.cfg.delta(), &fit_grid)?;
    sink.write_json(
        "ensemble_summary.json",
        &serde_json::json!({
            "n_trees": summaries.len(),
            "epsilon": eps,
            "horizon": mc.horizon,
            "delta": ctx.cfg.delta(),
            "survival_frequency": summary.survival_frequency,
            "survival_se": summary.survival_se,
            "mean_area": summary.mean_area,
            "area_se": summary.area_se,
            "growth_fit": summary.growth_fit,
            "capped_trees": capped_count,
        }),
    )?;
    ctx.say(&format!(
        "{} trees, survival {:.4}, mean area {:.4}",
        summaries.len(),
        summary.survival_frequency,
        summary.mean_area
    ));
    if any_capped {
        sink.partial = true;
        return Err(Error::Resource(format!(
            "{capped_count} trees hit the node cap {}; outputs flagged partial",
            ctx.cfg.tree.node_cap
        )));
    }
    Ok(())
}

fn cmd_renewal(ctx: &Ctx, sink: &mut OutputSink) -> Result<(), Error> {
    let table = ctx.table()?;
    let mc = &ctx.cfg.mc;
    let eps = *ctx.cfg.excursion.epsilon.last().unwrap();
    let samples = sample_ensemble(
        &table,
        eps,
        mc.dt,
        mc.horizon,
        ctx.seed,
        4,
        mc.n_paths,
        ctx.cfg.excursion.retry_cap,
    )?;
    let n_grid = 1000usize;
    let dt_grid = mc.horizon / n_grid as f64;
    let grid: Vec<f64> = (0..=n_grid).map(|i| i as f64 * dt_grid).collect();
    let coeffs = ctx.coeffs.clone();
    let f_curve = estimate_fq_curve(&samples, |y| y, &grid)?;
    let mu_curve = estimate_fq_curve(&samples, |y| coeffs.a(y), &grid)?;
    let input = RenewalInput {
        f: f_curve.iter().map(|(_, e)| e.value.max(0.0)).collect(),
        mu: mu_curve.iter().map(|(_, e)| e.value.max(0.0)).collect(),
        dt: dt_grid,
    };
    let m = solve_renewal(&input)?;

    let curve_csv = |vals: &[f64]| {
        let mut s = String::from("t,value\n");
        for (t, v) in grid.iter().zip(vals) {
            s.push_str(&format!("{},{}\n", csv_num(*t), csv_num(*v)));
        }
        s
    };
    sink.write("fq.csv", curve_csv(&input.f).as_bytes(), false)?;
    sink.write("muq.csv", curve_csv(&input.mu).as_bytes(), false)?;
    sink.write("m.csv", curve_csv(&m).as_bytes(), false)?;

    let mut summary = serde_json::json!({
        "epsilon": eps,
        "n_excursions": samples.len(),
        "grid_dt": dt_grid,
        "m_end": m.last(),
    });
    let (theta, _) = table.theta();
    if theta > 1.0 {
        if let Ok((alpha, _)) = table.malthusian_alpha() {
            if let Ok(r) = asymptotic_ratios(&m, alpha, &input) {
                summary["alpha"] = serde_json::json!(alpha);
                summary["tail_ratio"] = serde_json::json!(r.tail_ratio);
                summary["predicted_ratio"] = serde_json::json!(r.predicted);
            }
        }
    }
    sink.write_json("renewal_summary.json", &summary)?;
    ctx.say(&format!("renewal solved on {} cells", m.len()));
    Ok(())
}

fn cmd_verify(ctx: &Ctx, sink: &mut OutputSink) -> Result<(), Error> {
    let results = run_all(SuiteConfig { seed: ctx.seed })?;
    sink.write_json("verification_report.json", &results)?;
    let mut failed = Vec::new();
    for r in &results {
        let status = if r.pass { "pass" } else { "FAIL" };
        ctx.say(&format!(
            "[{status}] {}: observed {:.6} vs expected {:.6} (tol {:.2e})",
            r.name, r.observed, r.expected, r.tolerance
        ));
        if !r.pass {
            failed.push(r.name.clone());
        }
    }
    if !failed.is_empty() {
        return Err(Error::Config(format!(
            "__verify_failed__:{}",
            failed.join(", ")
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => return emit_error("config", "--config PATH is required", EXIT_CONFIG),
    };
    let raw = match fs::read(&config_path) {
        Ok(b) => b,
        Err(e) => {
            return emit_error(
                "config",
                &format!("cannot read {}: {e}", config_path.display()),
                EXIT_CONFIG,
            )
        }
    };
    let config_hash = hex_digest(&raw);
    let cfg: RunConfig = match serde_json::from_slice(&raw) {
        Ok(c) => c,
        Err(e) => return emit_error("config", &format!("invalid config: {e}"), EXIT_CONFIG),
    };
    if let Err(e) = cfg.validate() {
        return emit_error("config", &format!("{e}"), EXIT_CONFIG);
    }

    // Seed precedence: --seed, then VIM_SEED, then the config.
    let (seed, seed_source) = if let Some(s) = cli.seed {
        (s, "flag")
    } else if let Ok(v) = std::env::var("VIM_SEED") {
        match v.parse::<u64>() {
            Ok(s) => (s, "env"),
            Err(_) => return emit_error("config", "VIM_SEED is not a valid u64", EXIT_CONFIG),
        }
    } else {
        (cfg.mc.seed, "config")
    };

    let coeffs = match cfg.coeffs() {
        Ok(c) => c,
        Err(e) => return emit_error("config", &format!("{e}"), EXIT_CONFIG),
    };

    let out_dir = cli.out.clone().unwrap_or_else(|| cfg.outputs.clone());
    let mut sink = match OutputSink::new(&out_dir) {
        Ok(s) => s,
        Err(e) => return emit_error("io", &format!("{e}"), EXIT_CONFIG),
    };
    let started = now_unix();
    let ctx = Ctx {
        cfg,
        coeffs,
        seed,
        seed_source: seed_source.to_string(),
        quiet: cli.quiet,
    };

    let run_result = match cli.command {
        Command::Analyze => cmd_analyze(&ctx, &mut sink),
        Command::SimulatePaths => cmd_simulate_paths(&ctx, &mut sink),
        Command::SimulateExcursions => cmd_simulate_excursions(&ctx, &mut sink),
        Command::SimulateTree => cmd_simulate_tree(&ctx, &mut sink),
        Command::Renewal => cmd_renewal(&ctx, &mut sink),
        Command::Verify => cmd_verify(&ctx, &mut sink),
    };

    // The manifest is always written, even on failure; partial outputs stay
    // flagged so downstream readers can tell what is trustworthy.
    let finish = sink.finish(&config_hash, seed, &ctx.seed_source, started);

    match (run_result, finish) {
        (Ok(()), Ok(_)) => ExitCode::SUCCESS,
        (Ok(()), Err(e)) => emit_error("io", &format!("{e}"), EXIT_NUMERICAL),
        (Err(e), _) => {
            let msg = format!("{e}");
            if let Some(list) = msg.strip_prefix("__verify_failed__:") {
                emit_error(
                    "verify",
                    &format!("verification failed: {list}"),
                    EXIT_VERIFY,
                )
            } else {
                let kind = match &e {
                    Error::Config(_) | Error::Domain(_) => "config",
                    Error::Precondition(_) => "assumption",
                    Error::Numerical(_) => "numerical",
                    Error::Resource(_) => "resource",
                    Error::Io(_) => "io",
                };
                emit_error(kind, &msg, exit_code_for(&e))
            }
        }
    }
}
