//! End-to-end exercises of the `vim` binary: exit-code contract,
//! reproducibility, and output shapes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vim")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("vim-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write_config(dir: &Path, model: &str, extra_mc: &str) -> PathBuf {
    let body = format!(
        r#"{{
  "model": {model},
  "analysis": {{ "tol": 1e-10, "domain_cap": 10000.0 }},
  "mc": {{ "seed": 7, "n_paths": 50, "dt": 0.002{extra_mc}, "horizon": 4.0 }},
  "excursion": {{ "epsilon": [0.4, 0.2] }},
  "tree": {{ "x0": 1.0, "node_cap": 4000 }},
  "outputs": "{}"
}}"#,
        dir.join("out").display()
    );
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

const FELLER: &str = r#"{ "LogisticFeller": { "kappa": 1.0, "gamma": 0.0, "carrying_capacity": 0.0, "beta": 1.0 } }"#;

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env_remove("VIM_SEED").output().unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.lines().last().unwrap_or("{}")).unwrap_or_else(|_| {
        panic!("stderr is not one JSON line: {line}")
    })
}

#[test]
fn analyze_reports_critical_feller() {
    let d = tmp_dir("analyze");
    let cfg = write_config(&d, FELLER, "");
    let out = run(&["--config", cfg.to_str().unwrap(), "--quiet", "analyze"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["regime"], "critical");
    let theta = report["theta"].as_f64().unwrap();
    assert!((theta - 1.0).abs() < 1e-6);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed_source"], "config");
    assert_eq!(manifest["partial"], false);
    assert!(manifest["files"].as_array().unwrap().len() >= 2);
}

#[test]
fn invalid_config_exits_one() {
    let d = tmp_dir("badcfg");
    // Negative dt.
    let cfg = write_config(&d, FELLER, "");
    let body = fs::read_to_string(&cfg).unwrap().replace("0.002", "-0.002");
    fs::write(&cfg, body).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "verify"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "config");

    // Unknown field.
    let cfg2 = d.join("unknown.json");
    let mut body = fs::read_to_string(write_config(&d, FELLER, "")).unwrap();
    body = body.replacen("\"analysis\"", "\"misspelled\": 1, \"analysis\"", 1);
    fs::write(&cfg2, body).unwrap();
    let out = run(&["--config", cfg2.to_str().unwrap(), "analyze"]);
    assert_eq!(out.status.code(), Some(1));

    // Epsilon list not strictly decreasing.
    let cfg3 = d.join("eps.json");
    let body = fs::read_to_string(write_config(&d, FELLER, ""))
        .unwrap()
        .replace("[0.4, 0.2]", "[0.2, 0.4]");
    fs::write(&cfg3, body).unwrap();
    let out = run(&["--config", cfg3.to_str().unwrap(), "analyze"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn assumption_violation_exits_two_with_report() {
    let d = tmp_dir("assumption");
    // Quadratic noise near zero violates the near-zero occupation condition.
    let model = r#"{ "PowerLaw": { "c1": 0.5, "c2": 1.0, "c3": 0.0, "c4": 1.0,
        "k1": 1.0, "k2": 2.0, "k3": 2.0 } }"#;
    let cfg = write_config(&d, model, "");
    let out = run(&["--config", cfg.to_str().unwrap(), "--quiet", "analyze"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_json(&out)["error"]["kind"], "assumption");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("out/assumption_report.json")).unwrap()).unwrap();
    assert_eq!(report["a2_ok"], false);
    // Manifest still written, with the report listed.
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("out/manifest.json")).unwrap()).unwrap();
    assert!(manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f["name"] == "assumption_report.json"));
}

#[test]
fn reruns_are_byte_identical_and_seed_overrides_apply() {
    let d = tmp_dir("repro");
    let cfg = write_config(&d, FELLER, "");
    let out_a = d.join("a");
    let out_b = d.join("b");
    for out in [&out_a, &out_b] {
        let r = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
            "simulate-paths",
        ]);
        assert!(r.status.success());
    }
    assert_eq!(
        fs::read(out_a.join("paths.csv")).unwrap(),
        fs::read(out_b.join("paths.csv")).unwrap()
    );

    // VIM_SEED overrides the config and is recorded.
    let out_c = d.join("c");
    let r = Command::new(bin())
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_c.to_str().unwrap(),
            "--quiet",
            "simulate-paths",
        ])
        .env("VIM_SEED", "99")
        .output()
        .unwrap();
    assert!(r.status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out_c.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["seed_source"], "env");
    assert_ne!(
        fs::read(out_a.join("paths.csv")).unwrap(),
        fs::read(out_c.join("paths.csv")).unwrap()
    );

    // --seed outranks VIM_SEED.
    let out_d = d.join("d");
    let r = Command::new(bin())
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_d.to_str().unwrap(),
            "--seed",
            "7",
            "--quiet",
            "simulate-paths",
        ])
        .env("VIM_SEED", "99")
        .output()
        .unwrap();
    assert!(r.status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out_d.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed_source"], "flag");
    assert_eq!(
        fs::read(out_a.join("paths.csv")).unwrap(),
        fs::read(out_d.join("paths.csv")).unwrap()
    );
}

#[test]
fn zero_mass_tree_writes_single_row() {
    let d = tmp_dir("zerotree");
    let cfg = write_config(&d, FELLER, "");
    let body = fs::read_to_string(&cfg).unwrap().replace("\"x0\": 1.0", "\"x0\": 0.0");
    fs::write(&cfg, body).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "--quiet", "simulate-tree"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.join("out/tree.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "header plus exactly the root row:\n{csv}");
    assert!(lines[0].starts_with("node_id,parent_id,birth_time"));
}

#[test]
fn node_cap_exit_four_with_partial_flag() {
    let d = tmp_dir("cap");
    let model = r#"{ "LogisticFeller": { "kappa": 1.0, "gamma": 1.0, "carrying_capacity": 2.0, "beta": 1.0 } }"#;
    let cfg = write_config(&d, model, "");
    let body = fs::read_to_string(&cfg)
        .unwrap()
        .replace("\"node_cap\": 4000", "\"node_cap\": 5")
        .replace("\"horizon\": 4.0", "\"horizon\": 12.0")
        .replace("\"n_paths\": 50", "\"n_paths\": 30");
    fs::write(&cfg, body).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "--quiet", "simulate-tree"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_json(&out)["error"]["kind"], "resource");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["partial"], true);
}

#[test]
fn csv_dialect_is_plain_lf_with_headers() {
    let d = tmp_dir("dialect");
    let cfg = write_config(&d, FELLER, "");
    let out = run(&["--config", cfg.to_str().unwrap(), "--quiet", "simulate-paths"]);
    assert!(out.status.success());
    let bytes = fs::read(d.join("out/paths.csv")).unwrap();
    assert!(!bytes.contains(&b'\r'));
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("path_id,t,value\n"));
    let line = text.lines().nth(1).unwrap();
    assert_eq!(line.split(',').count(), 3);
    assert!(!line.contains(';'));
}
