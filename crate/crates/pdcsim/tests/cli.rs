use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn pdcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdcsim")).args(args).env_remove("PDCSIM_OUT_DIR").output().expect("binary runs")
}

fn run_into(config: &Path, out: &Path, workers: &str) -> Output {
    pdcsim(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers])
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn bundled_scenarios_validate() {
    for name in [
        "nrf_sweep.json",
        "separability_sweep.json",
        "oracle_validate.json",
        "ghost_image.json",
        "ghost_diffraction.json",
    ] {
        let out = pdcsim(&["validate", scenario(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    for name in ["nrf_sweep.json", "ghost_image.json", "ghost_diffraction.json", "oracle_validate.json"] {
        let a = tmp.path().join(format!("a-{name}"));
        let b = tmp.path().join(format!("b-{name}"));
        assert!(run_into(&scenario(name), &a, "1").status.success());
        assert!(run_into(&scenario(name), &b, "4").status.success());
        let files = manifest(&a)["files"].as_array().unwrap().clone();
        assert!(!files.is_empty());
        for f in &files {
            let rel = f["path"].as_str().unwrap();
            assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{name}/{rel}");
        }
        assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
    }
}

#[test]
fn manifest_hashes_match_the_files() {
    use sha2::{Digest, Sha256};
    let tmp = TempDir::new().unwrap();
    assert!(run_into(&scenario("separability_sweep.json"), tmp.path(), "2").status.success());
    let m = manifest(tmp.path());
    assert_eq!(m["kind"], "separability-sweep");
    assert_eq!(m["passed"], true);
    for f in m["files"].as_array().unwrap() {
        let bytes = fs::read(tmp.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    let csv = fs::read_to_string(tmp.path().join("correlations.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "mu_t,mu_r,n_pdc,tau,gamma,nrf,margin,separable");
    assert_eq!(csv.lines().count(), 1 + 21 * 21 * 21 * 3);
    assert!(csv.contains("undefined"));
}

#[test]
fn oracle_example_meets_its_tolerance() {
    let tmp = TempDir::new().unwrap();
    let out = run_into(&scenario("oracle_validate.json"), tmp.path(), "1");
    assert!(out.status.success());
    let moments = fs::read_to_string(tmp.path().join("moments.csv")).unwrap();
    let mut rows = 0;
    for line in moments.lines().skip(1) {
        let rel: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel < 1e-6, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 5);
    let dist = fs::read_to_string(tmp.path().join("photon_distribution.csv")).unwrap();
    assert_eq!(dist.lines().count(), 1 + 61 * 61);
}

#[test]
fn failing_checks_set_the_exit_status() {
    let tmp = TempDir::new().unwrap();
    let strict = write_config(
        &tmp,
        "strict.json",
        r#"{"kind": "oracle-validate", "mu_t": 0.5, "mu_r": 0.5, "n_pdc": 0.3, "cutoff": 60, "tolerance": 1e-30}"#,
    );
    let out = run_into(&strict, &tmp.path().join("strict"), "1");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL moments"));
    assert_eq!(manifest(&tmp.path().join("strict"))["passed"], false);

    let short = write_config(
        &tmp,
        "short.json",
        r#"{"kind": "oracle-validate", "mu_t": 0.5, "mu_r": 0.5, "n_pdc": 0.3, "cutoff": 5}"#,
    );
    let out = run_into(&short, &tmp.path().join("short"), "1");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL truncation"));
}

#[test]
fn invalid_configs_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let bad = write_config(
        &tmp,
        "bad.json",
        r#"{"kind": "nrf-sweep", "grid": {"mu_t": {"list": [1]}, "mu_r": {"list": [1]}, "n_pdc": {"list": [0.1, -2]}}}"#,
    );
    for cmd in ["validate", "run"] {
        let out = pdcsim(&[cmd, bad.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n_pdc[1]"), "{cmd}");
    }
    let out = pdcsim(&["validate", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn environment_overrides_the_configured_directory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "sweep.json",
        r#"{"kind": "separability-sweep", "output_dir": "never-used",
            "grid": {"mu_t": {"list": [1]}, "mu_r": {"list": [1]}, "n_pdc": {"list": [0.1, 1]}}}"#,
    );
    let env_dir = tmp.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_pdcsim"))
        .args(["run", cfg.to_str().unwrap()])
        .current_dir(tmp.path())
        .env("PDCSIM_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("manifest.json").exists());
    assert!(!tmp.path().join("never-used").exists());
}

#[test]
fn csv_objects_load_relative_to_the_config() {
    let tmp = TempDir::new().unwrap();
    let mut object = String::from("x,re,im\n");
    for j in 0..65 {
        let x = (j as f64 - 32.0) * 2.5e-6;
        let t = if x.abs() < 10e-6 { 1.0 } else { 0.0 };
        object.push_str(&format!("{x},{t},0\n"));
    }
    fs::write(tmp.path().join("slit.csv"), object).unwrap();
    let cfg = write_config(
        &tmp,
        "csv.json",
        r#"{"kind": "ghost-image", "n_half": 64,
            "geometry": {"lambda": 0.7e-6, "d1": 0.1, "d2": 0.1, "d3": 0.6, "f_r": 0.15, "variant": "object-plane"},
            "object": {"type": "csv", "path": "slit.csv"},
            "profile": {"type": "constant", "mu_t": 0.2, "mu_r": 0.1, "n_pdc": 0.5}}"#,
    );
    let out = run_into(&cfg, &tmp.path().join("out"), "2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = fs::read_to_string(tmp.path().join("out/reconstruction.csv")).unwrap();
    assert_eq!(rec.lines().next().unwrap(), "x,value_raw,value_normalized");
    assert_eq!(rec.lines().count(), 66);
    let pgm = fs::read(tmp.path().join("out/g2_map.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n65 65\n255\n"));
}
