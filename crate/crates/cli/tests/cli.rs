use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &str, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ceuler"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn modulus_tables_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["modulus"], r#"{"modulus":{"family":"zero"}}"#, "m0");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("m0");
    for row in csv_rows(&out.join("rho_table.csv")) {
        let t: f64 = row[0].parse().unwrap();
        let rho: f64 = row[1].parse().unwrap();
        assert!((rho - (-t.exp()).exp()).abs() < 1e-8, "t = {t}");
    }
    let table = csv_rows(&out.join("modulus_table.csv"));
    assert!(table.iter().all(|r| r.len() == 4));
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "modulus");
    assert_eq!(manifest["config"]["modulus"]["family"], "zero");
    for name in ["modulus_table.csv", "rho_table.csv", "classification.json"] {
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(manifest["outputs"][name], hex::encode(Sha256::digest(&bytes)), "{name}");
    }
}

#[test]
fn borderline_classification() {
    let tmp = TempDir::new().unwrap();
    for (a, class) in [(PI / 2.0 - 0.1, "divergent"), (PI / 2.0 + 0.1, "convergent")] {
        let o = run(tmp.path(), &["modulus"], &format!(r#"{{"modulus":{{"family":"capped_log","a":{a}}}}}"#), "c");
        assert_eq!(o.status.code(), Some(0));
        let c = json(&tmp.path().join("c/classification.json"));
        assert_eq!(c["analytic"]["divergence"], class);
        assert_eq!(c["numeric"]["divergence"], class);
        assert_eq!(c["consistent"], true);
    }
}

#[test]
fn bad_configs_exit_with_code_2() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["modulus"], "{not json", "bad");
    assert_eq!(o.status.code(), Some(2));
    let o = run(tmp.path(), &["modulus"], r#"{"modulus":{"family":"capped_log","a":-1}}"#, "neg");
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ceuler")).arg("modulus").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ceuler")).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

fn corner(m: &str, r0: f64) -> String {
    format!(r#"{{"domain":{{"construction":"modulus_domain","beta_tilde":{{"modulus":{m},"r0":{r0}}}}}}}"#)
}

#[test]
fn zero_modulus_domain_is_equilateral() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["domain"], &corner(r#"{"family":"zero"}"#, 0.25), "tri");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&tmp.path().join("tri/domain_report.json"));
    let corners = r["corners"].as_array().unwrap();
    assert_eq!(corners.len(), 3);
    for c in corners {
        assert!((c["interior_angle"].as_f64().unwrap() - PI / 3.0).abs() < 0.01);
    }
    let svg = std::fs::read_to_string(tmp.path().join("tri/boundary.svg")).unwrap();
    assert!(svg.contains("<svg"));
    assert_eq!(r["winding_number"], 1);
}

#[test]
fn symmetric_domain_has_small_residuals() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["domain"], &corner(&format!(r#"{{"family":"capped_log","a":{}}}"#, PI / 8.0), 0.25), "sym");
    assert_eq!(o.status.code(), Some(0));
    let r = json(&tmp.path().join("sym/domain_report.json"));
    assert!(r["symmetry_residual"].as_f64().unwrap() < 1e-8);
    assert!(r["holomorphy_residual"].as_f64().unwrap() < 1e-5);
    assert!(r["delta"]["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn construction_preconditions_are_named() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["domain"], &corner(r#"{"family":"zero"}"#, 0.6), "big");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r0"));
    let o = run(tmp.path(), &["domain"], &corner(r#"{"family":"capped_log","a":3.0}"#, 0.25), "steep");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pi/6"));
}

const ROTATION: &str = r#"{"domain":{"uniform_density":1.0},"field":{"kind":"constant","c":1.0},
"grid":{"d0":0.75,"levels":2,"per_octave":3,"n_phi":12,"rel_tol":1e-6,"use_symmetry":true},
"zeta0":[0.5,0.0],"trajectory":{"horizon":6.0,"eps_stop":1e-6,"tol":1e-9},"checks":["lower"]}"#;

#[test]
fn simulate_is_deterministic_and_reuses_the_cache() {
    let tmp = TempDir::new().unwrap();
    let a = run(tmp.path(), &["simulate"], ROTATION, "a");
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(tmp.path(), &["simulate"], ROTATION, "b");
    assert_eq!(b.status.code(), Some(0));
    for f in ["trajectory.csv", "bound_report.json", "manifest.json"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
    let again = run(tmp.path(), &["simulate"], ROTATION, "a");
    assert!(String::from_utf8_lossy(&again.stderr).contains("cache hit"));
    let r = json(&tmp.path().join("a/bound_report.json"));
    assert_eq!(r["termination"], "horizon");
    assert_eq!(r["lower"]["pass"], true);
    assert!(r["lower"]["C_fit"].as_f64().unwrap() < 1e-6);
    for row in csv_rows(&tmp.path().join("a/trajectory.csv")) {
        let d: f64 = row[3].parse().unwrap();
        assert!((d - 0.5).abs() < 1e-6);
    }
}

#[test]
fn exhausted_grid_flags_a_partial_record() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"domain":{"uniform_density":1.0},"field":{"kind":"constant","c":1.0},
"grid":{"d0":0.75,"levels":2,"per_octave":3,"n_phi":12,"rel_tol":1e-6,"use_symmetry":true},
"zeta0":[0.5,0.0],"trajectory":{"horizon":6.0,"eps_stop":1e-6,"tol":1e-9}}"#;
    let cfg = cfg.replace("[0.5,0.0]", "[0.9,0.0]");
    let o = run(tmp.path(), &["simulate"], &cfg, "edge");
    assert_eq!(o.status.code(), Some(1));
    let r = json(&tmp.path().join("edge/bound_report.json"));
    assert!(r["termination"]["error"].as_str().unwrap().contains("refine"));
    assert_eq!(r["pass"], false);
}

#[test]
fn verify_subcommands() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["verify", "folding", "--seed", "3"], r#"{"random":4,"chain":true}"#, "fold");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&tmp.path().join("fold/folding_report.json"));
    assert_eq!(r["passed"], 4);
    assert_eq!(json(&tmp.path().join("fold/manifest.json"))["seed"], 3);

    let bad = r#"{"instances":[{"theta_star":0.0,"delta":0.3,"beta":{"atoms":[[0.0,1.0]],"uniform_density":0.0},
"alpha":2.0,"f":{"kind":"distance_power","exponent":0.8333333333333334},"g":{"kind":"zero"},"h":{"kind":"power","p":1.5},"cap_radius":0.3}]}"#;
    let o = run(tmp.path(), &["verify", "folding"], bad, "badfold");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-integrable"));

    let o = run(tmp.path(), &["verify", "lemma31"], r#"{"domain":{"uniform_density":1.0}}"#, "l31");
    assert_eq!(o.status.code(), Some(0));
    let r = json(&tmp.path().join("l31/lemma31_report.json"));
    assert_eq!(r["pass"], true);
    assert_eq!(r["rows"].as_array().unwrap().len(), 4);
}
