use std::path::PathBuf;
use std::process::Command;

use graphscale_cli::config::{Format, OutputConfig};
use graphscale_cli::{run_experiment, Command as Step, ExperimentConfig};
use serde_json::Value;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&config_path(name)).unwrap()
}

fn manifest(dir: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn bundled_configs_round_trip() {
    for name in ["pc42", "t3", "baker-r1.74", "baker-r2.2", "baker-r2.5"] {
        let c = load(name);
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c, "{name}");
        c.system.build().unwrap();
    }
}

#[test]
fn binary_pressure_on_pc42() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_graphscale"))
        .args(["pressure", "--config"])
        .arg(config_path("pc42"))
        .arg("--out")
        .arg(tmp.path())
        .args(["--threads", "2", "--seed", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    let s = m["pressure"]["s_star"].as_f64().unwrap();
    assert!((s - 0.694242).abs() < 1e-6, "{s}");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["hypothesis"]["status"], "satisfied");
    let csv = std::fs::read_to_string(tmp.path().join("pressure.csv")).unwrap();
    assert!(csv.starts_with("s,psi\n"));
}

#[test]
fn config_errors_exit_2_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    let text = std::fs::read_to_string(config_path("t3"))
        .unwrap()
        .replace("m = 3", "m = -3");
    std::fs::write(&bad, text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_graphscale"))
        .args(["graph", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains('m'), "{err}");
}

#[test]
fn invalid_system_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = load("t3");
    c.system.a = 2.0.into();
    let o = run_experiment(&c, Step::Graph, tmp.path());
    assert_eq!(o.code, 2);
    assert_eq!(manifest(tmp.path())["status"], "invalid-system");
}

#[test]
fn violated_hypothesis_downgrades_pressure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config_path("baker-r2.2"))
        .unwrap()
        .replace("r = 2.2", "r = 1.2");
    let c = ExperimentConfig::parse(&text).unwrap();
    let o = run_experiment(&c, Step::Pressure, tmp.path());
    assert_eq!(o.code, 2);
    assert_eq!(o.manifest["hypothesis"]["status"], "violated");
    assert!(!o.notes.is_empty());
    // graph alone is not downgraded
    let o = run_experiment(&c, Step::Graph, &tmp.path().join("g"));
    assert_eq!(o.code, 0);
}

#[test]
fn baker_graph_has_partial_zero_set() {
    let tmp = tempfile::tempdir().unwrap();
    let c = load("baker-r2.2");
    let o = run_experiment(&c, Step::Graph, tmp.path());
    assert_eq!(o.code, 0);
    let f = o.manifest["graph"]["fraction_zero"].as_f64().unwrap();
    assert!(f > 0.0 && f < 1.0, "{f}");
    let csv = std::fs::read_to_string(tmp.path().join("graph.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta,phi,depth,converged"));
    assert_eq!(csv.lines().count(), c.compute.grid_size + 1);
}

#[test]
fn t3_index_manifest_lists_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = load("t3");
    c.compute.local_grid = 5000;
    c.compute.ladder = (2, 8);
    let o = run_experiment(&c, Step::Index, tmp.path());
    assert_eq!(o.code, 0, "{:?}", o.notes);
    let idx = &o.manifest["index"];
    assert!((idx["s_star"].as_f64().unwrap() - 0.2011).abs() < 1e-3);
    let pts = idx["points"].as_array().unwrap();
    assert!((pts[0]["sigma_plus_predicted"].as_f64().unwrap() - 0.603).abs() < 1e-3);
    assert_eq!(pts[1]["sigma_minus_predicted"].as_f64().unwrap(), 1.0);
    assert!(pts.iter().all(|p| p["empirical"].is_number()));
    assert!(tmp.path().join("index_1.csv").exists());
}

#[test]
fn formats_control_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = load("pc42");
    c.compute.grid_size = 10_000;
    c.output = OutputConfig {
        dir: String::new(),
        formats: vec![Format::Json],
    };
    let o = run_experiment(&c, Step::Graph, tmp.path());
    assert_eq!(o.code, 0);
    assert!(tmp.path().join("manifest.json").exists());
    assert!(!tmp.path().join("graph.csv").exists());
}

#[test]
fn seed_changes_only_sampled_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = load("baker-r2.2");
    c.compute.check_points = 50;
    c.compute.conjugacy.samples = 50;
    let a = run_experiment(&c, Step::Check, &tmp.path().join("a"));
    c.compute.seed += 1;
    let b = run_experiment(&c, Step::Check, &tmp.path().join("b"));
    assert_eq!(a.code, 0);
    assert_eq!(b.code, 0);
    assert_ne!(a.manifest["config_sha256"], b.manifest["config_sha256"]);
    assert_ne!(
        a.manifest["check"]["conjugacy"]["max_gap"],
        b.manifest["check"]["conjugacy"]["max_gap"]
    );
    assert_eq!(a.manifest["pressure"], b.manifest["pressure"]);
}
