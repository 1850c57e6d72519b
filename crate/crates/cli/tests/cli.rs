use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use svv_core::entropy::mechanical_energy_pair;
use svv_core::pressure_law::PressureLaw;

const ROUNDOFF: f64 = 1e-14;

const CONSTANT: &str = r#"
seed = 1
samples = 2

[law]
kind = "polytropic"
gamma = 2.0

[grid]
half_width = 4.0
n = 64

[solver]
epsilon = 0.05
t_end = 0.1

[initial]
case = 3
rho_inf = 1.0
profile = { kind = "constant" }
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn svv(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svv"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .env_remove("SVV_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (h, rows) = read_csv(path);
    let k = h.iter().position(|c| c == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn error_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap()
}

#[test]
fn constant_state_has_zero_energy() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), CONSTANT);
    let out = d.path().join("out");
    let r = svv(&["simulate"], &cfg, &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let e = column(&out.join("diagnostics.csv"), "energy");
    assert!(!e.is_empty() && e.iter().all(|&v| v.abs() <= ROUNDOFF));
    for f in ["config.toml", "VERSION", "manifest.json", "trajectories.json", "frames/s0000_0000.svv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(out.join("config.toml")).unwrap(), CONSTANT);
}

#[test]
fn region_bound_violation_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[noise]\nkind = \"single_mode\"\na1 = 0.3\nprofile = {{ kind = \"bump\", center = 0.0, radius = 2.0, height = 1.0 }}\n",
        CONSTANT.replace("epsilon = 0.05", "epsilon = 1.0")
    );
    let cfg = write_config(d.path(), &text);
    let r = svv(&["simulate"], &cfg, &d.path().join("out"));
    assert_eq!(r.status.code(), Some(2));
    let j = error_json(&r);
    assert_eq!(j["kind"], "config");
    assert!(j["message"].as_str().unwrap().contains("invariant-region bound"));
}

#[test]
fn empty_config_lists_schema_errors() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "");
    for cmd in ["simulate", "validate", "sweep-epsilon"] {
        let r = svv(&[cmd], &cfg, &d.path().join("out"));
        assert_eq!(r.status.code(), Some(2), "{cmd}");
        assert!(error_json(&r)["message"].as_str().unwrap().contains("missing field"));
    }
}

#[test]
fn inverted_composite_thresholds_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    let text = CONSTANT.replace(
        "kind = \"polytropic\"\ngamma = 2.0",
        "kind = \"composite\"\ngamma1 = 2.2\ngamma2 = 1.6\nkappa1 = 0.3\nkappa2 = 0.4\nrho_lo = 4.0\nrho_hi = 0.5",
    );
    let cfg = write_config(d.path(), &text);
    let r = svv(&["validate"], &cfg, &d.path().join("out"));
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn sweep_needs_decreasing_epsilons_and_reports_each() {
    let d = tempfile::tempdir().unwrap();
    let bad = write_config(d.path(), &format!("{CONSTANT}\n[sweep]\nepsilons = [0.02, 0.05]\n"));
    assert_eq!(svv(&["sweep-epsilon"], &bad, &d.path().join("bad")).status.code(), Some(2));

    for eps in ["[0.05]", "[0.05, 0.04, 0.03]"] {
        let d = tempfile::tempdir().unwrap();
        let cfg = write_config(d.path(), &format!("{CONSTANT}\n[sweep]\nepsilons = {eps}\n"));
        let out = d.path().join("out");
        let r = svv(&["sweep-epsilon"], &cfg, &out);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
        let n = eps.matches(',').count() + 1;
        assert_eq!(column(&out.join("summary.csv"), "epsilon").len(), n);
        assert!(column(&out.join("young_measure.csv"), "variance").iter().all(|&v| v.abs() <= ROUNDOFF));
    }
}

#[test]
fn runtime_failure_exits_with_one_and_writes_error_json() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        &CONSTANT
            .replace("t_end = 0.1", "t_end = 1.0\ndt_level = 4\nsave_level = 2")
            .replace("n = 64", "n = 256"),
    );
    let out = d.path().join("out");
    let r = svv(&["simulate"], &cfg, &out);
    assert_eq!(r.status.code(), Some(1), "{}", String::from_utf8_lossy(&r.stderr));
    let j = error_json(&r);
    assert_eq!(j["kind"], "stability");
    assert_eq!(j["failures"].as_array().unwrap().len(), 2);
    let on_disk: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(on_disk, j);
}

#[test]
fn energy_table_matches_mechanical_energy() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "[law]\nkind = \"polytropic\"\ngamma = 1.4\n[entropy_table]\nspec = { kind = \"energy\" }\nrho = [0.0, 3.0, 7]\nu = [-2.0, 2.0, 5]\n",
    );
    let out = d.path().join("out");
    let r = svv(&["entropy-table"], &cfg, &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let p = out.join("entropy_table.csv");
    let law = PressureLaw::polytropic_scaled(1.4).unwrap();
    let (rho, u, eta, q) = (column(&p, "rho"), column(&p, "u"), column(&p, "eta"), column(&p, "q"));
    assert_eq!(rho.len(), 35);
    for k in 0..rho.len() {
        let o = mechanical_energy_pair(&law, rho[k], rho[k] * u[k]).unwrap();
        assert!((eta[k] - o.eta).abs() <= 1e-8 * o.eta.abs().max(1.0));
        assert!((q[k] - o.q).abs() <= 1e-8 * o.q.abs().max(1.0));
    }
}

#[test]
fn weak_entropy_table_vanishes_at_vacuum_and_bad_gamma_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let text = "[law]\nkind = \"polytropic\"\ngamma = 2.0\n[entropy_table]\nspec = { kind = \"compact_bump\", center = 0.0, width = 1.0 }\nrho = [0.0, 2.0, 3]\nu = [-1.0, 1.0, 3]\n";
    let cfg = write_config(d.path(), text);
    let out = d.path().join("out");
    assert_eq!(svv(&["entropy-table"], &cfg, &out).status.code(), Some(0));
    let p = out.join("entropy_table.csv");
    let (rho, eta, q) = (column(&p, "rho"), column(&p, "eta"), column(&p, "q"));
    for k in 0..rho.len() {
        if rho[k] == 0.0 {
            assert_eq!((eta[k], q[k]), (0.0, 0.0));
        }
    }
    let cfg = write_config(d.path(), &text.replace("gamma = 2.0", "gamma = 0.5"));
    assert_eq!(svv(&["entropy-table"], &cfg, &d.path().join("bad")).status.code(), Some(2));
}

#[test]
fn validate_default_config_passes() {
    let d = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[noise]\nkind = \"single_mode\"\na1 = 0.3\nprofile = {{ kind = \"bump\", center = 0.0, radius = 2.0, height = 1.0 }}\n",
        CONSTANT.replace("profile = { kind = \"constant\" }", "profile = { kind = \"bump\", amplitude = 0.5, width = 1.0 }")
    );
    let cfg = write_config(d.path(), &text);
    let out = d.path().join("out");
    let r = svv(&["validate"], &cfg, &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("validate.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn output_dir_env_is_honoured() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), CONSTANT);
    let out = d.path().join("from-env");
    let r = Command::new(env!("CARGO_BIN_EXE_svv"))
        .args(["simulate", "--samples", "1", "--config"])
        .arg(&cfg)
        .env("SVV_OUTPUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    assert!(out.join("diagnostics.csv").exists());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["samples"], 1);
}
