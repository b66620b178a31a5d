use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_atc");

fn baseline_text() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/baseline.cfg")).unwrap()
}

/// A 10 km city on a 1 km grid: same physics, a fraction of the runtime.
fn small_scenario(dir: &Path) -> PathBuf {
    let text = baseline_text()
        .replace("radius = 25.0", "radius = 10.0")
        .replace("dx = 0.5", "dx = 1.0")
        .replace("multistart = 6", "multistart = 2");
    let path = dir.join("small.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn atc(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ATC_SCENARIO").env_remove("ATC_OUT").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_body(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# schema="), "{} lacks a schema line", path.display());
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn optimize_writes_the_output_set_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let scen = small_scenario(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = atc(&["optimize", "--scheme", "MRT_ONLY", "--scenario", s(&scen), "--out", s(&a)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["design_profile.csv", "costs.csv", "summary.json", "manifest.json", "scenario.cfg"] {
        assert!(a.join(f).exists(), "{f} missing");
    }
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().any(|l| l.contains("status=ok") && l.contains("q0=")), "progress lines are key=value");

    // MRT_ONLY never deploys a feeder
    let rows = csv_body(&a.join("design_profile.csv"));
    let mode = rows[0].iter().position(|c| c == "feeder").unwrap();
    assert!(rows[1..].iter().all(|r| r[mode] == "NONE"));

    // rerunning from the resolved scenario reproduces every file byte for byte
    let out = atc(&["optimize", "--scheme", "MRT_ONLY", "--scenario", s(&a.join("scenario.cfg")), "--out", s(&b)]);
    assert!(out.status.success());
    for f in ["design_profile.csv", "costs.csv", "summary.json", "scenario.cfg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert!(summary["schemes"][0]["z24h"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["schemes"][0]["violations"].as_array().unwrap().len(), 0);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "optimize");
    assert_eq!(manifest["options"]["scheme"], "MRT_ONLY");
}

#[test]
fn env_overrides_apply() {
    let tmp = TempDir::new().unwrap();
    let scen = small_scenario(tmp.path());
    let out_dir = tmp.path().join("env");
    let out = Command::new(BIN)
        .args(["optimize"])
        .env("ATC_SCENARIO", &scen)
        .env("ATC_OUT", &out_dir)
        .env("ATC_SCHEME", "mrt-only")
        .env("ATC_SEED", "11")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["options"]["scheme"], "MRT_ONLY");
}

#[test]
fn compare_and_plotdata() {
    let tmp = TempDir::new().unwrap();
    let scen = small_scenario(tmp.path());
    let dir = tmp.path().join("cmp");
    let out = atc(&["compare", "--scenario", s(&scen), "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let gains = csv_body(&dir.join("gains.csv"));
    assert_eq!(gains[0], ["kind", "reference", "alternative", "scheme", "period", "zone", "metric", "value"]);
    assert!(gains.iter().any(|r| r[0] == "gain" && r[1] == "MRT_FRF" && r[4] == "daily" && r[6] == "total"));
    for zone in ["x<=6", "6<x<=15"] {
        assert!(gains.iter().any(|r| r[0] == "access_min" && r[5] == zone && r[6] == "access_total"));
    }

    let out = atc(&["plotdata", "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = csv_body(&dir.join("plot_series.csv"));
    assert_eq!(series[0], ["x", "variable", "value", "period", "scheme"]);
    for var in ["rho", "cum_demand", "S_r", "S_c", "s", "s_c", "H", "Q", "feeder_mode", "Z_T"] {
        assert!(series.iter().any(|r| r[1] == var), "no {var} series");
    }
    let first = std::fs::read(dir.join("plot_series.csv")).unwrap();
    assert!(atc(&["plotdata", "--out", s(&dir)]).status.success());
    assert_eq!(first, std::fs::read(dir.join("plot_series.csv")).unwrap());
}

#[test]
fn oracle_emits_one_row_per_configuration() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("oracle");
    let out = atc(&["oracle", "--trials", "300", "--seed", "5", "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_body(&dir.join("oracle.csv"));
    assert_eq!(rows.len(), 1 + 9 * 11);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.cfg");
    std::fs::write(&bad, "not toml at all").unwrap();
    let out = atc(&["optimize", "--scenario", s(&bad), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));

    let missing = atc(&["optimize", "--scenario", s(&tmp.path().join("nope.cfg")), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(missing.status.code(), Some(2));

    assert_eq!(atc(&["plotdata", "--out", s(&tmp.path().join("empty"))]).status.code(), Some(2));

    // trains far too small for the centre flow
    let tiny = tmp.path().join("tiny.cfg");
    std::fs::write(&tiny, std::fs::read_to_string(small_scenario(tmp.path())).unwrap().replace("c_mrt = 1200.0", "c_mrt = 1.0")).unwrap();
    let out = atc(&["optimize", "--scheme", "MRT_ONLY", "--scenario", s(&tiny), "--out", s(&tmp.path().join("y"))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn partial_sweep_failure_exits_4() {
    let tmp = TempDir::new().unwrap();
    let scen = small_scenario(tmp.path());
    let dir = tmp.path().join("sweep");
    let out = atc(&["sweep", "--radii", "8,-1", "--vots", "10", "--scenario", s(&scen), "--out", s(&dir)]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_body(&dir.join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][5], "ok");
    assert_eq!(rows[2][5], "failed");
}
