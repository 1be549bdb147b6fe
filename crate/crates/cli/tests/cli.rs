use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn knotflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotflow"))
        .args(args)
        .env_remove("KNOTFLOW_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn assert_valid(schema_file: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(schema_file);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| e.to_string()).collect(),
    };
    panic!("{schema_file}: {msgs:?}\n{doc}");
}

#[test]
fn nonsingular_field_passes_check() {
    let o = knotflow(&["beltrami", "check", "--A", "1", "--B", "0.5", "--C", "0", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("beltrami_check.schema.json", &doc);
    assert!(doc["curl_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(doc["singularity"]["certified_nonsingular"], true);
}

#[test]
fn singular_field_is_a_violation() {
    let o = knotflow(&["beltrami", "check", "--A", "1", "--B", "1", "--C", "0.5", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("beltrami_check.schema.json", &doc);
    assert_eq!(doc["singularity"]["nonsingular_criterion"], false);
    assert!(!doc["singularity"]["points"].as_array().unwrap().is_empty());
}

#[test]
fn lorenz_knots_include_trefoil() {
    let o = knotflow(&["template", "knots", "--m", "0", "--n", "0", "--max-len", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2 + 1 + 2 + 3 + 6);
    for l in &lines {
        assert_valid("knot_report.schema.json", l);
    }
    let tre = lines.iter().find(|l| l["word"] == "xyxyy").expect("xyxyy listed");
    assert_eq!(tre["name"], "trefoil (right-handed)");
    assert_eq!(tre["self_linking"], 1);
}

#[test]
fn link_command_prints_integer() {
    for (n, want) in [("-1", "-1"), ("1", "1"), ("0", "0")] {
        let (w1, w2) = if n == "0" { ("x", "y") } else { ("xy", "y") };
        let o = knotflow(&["template", "link", "--m", "0", "--n", n, "--w1", w1, "--w2", w2]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), want);
    }
}

#[test]
fn words_listing() {
    let o = knotflow(&["template", "words", "--max-len", "4"]);
    assert_eq!(stdout(&o), "x\ny\nxy\nxxy\nxyy\nxxxy\nxxyy\nxyyy\n");
}

#[test]
fn saddle_orbit_from_pi_expressions() {
    let o = knotflow(&["flow", "orbit", "--A", "1", "--B", "1/2", "--C", "0", "--section", "y=0", "--guess", "pi/2-0.07,pi-0.14"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("periodic_orbit.schema.json", &doc);
    assert!((doc["period"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-6);
    assert_eq!(doc["stability"], "hyperbolic");
}

#[test]
fn tight_reeb_on_and_off_sphere() {
    let o = knotflow(&["tight", "reeb", "--point", "0.5,-0.5,0.5,-0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("tight_reeb.schema.json", &doc);
    assert_eq!(doc["alpha_on_reeb"], 1.0);
    let o = knotflow(&["tight", "reeb", "--point", "1,1,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn integrate_csv_and_determinism() {
    let args = ["flow", "integrate", "--A", "1", "--B", "0.7", "--C", "0.3", "--x0", "0.1,0.2,0.3", "--t-end", "5"];
    let a = knotflow(&args);
    let b = knotflow(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,z"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 5.0);
    let c = knotflow(&["beltrami", "check", "--A", "1", "--B", "0.7", "--C", "0.3", "--seed", "9"]);
    let d = knotflow(&["beltrami", "check", "--A", "1", "--B", "0.7", "--C", "0.3", "--seed", "9"]);
    assert_eq!(c.stdout, d.stdout);
}

fn annulus(dir: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotflow"))
        .args(["contact", "annulus", "--monodromy", "rot:1", "--out", "grid.csv"])
        .args(extra)
        .env("KNOTFLOW_OUT_DIR", dir)
        .output()
        .unwrap()
}

#[test]
fn annulus_writes_grid_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = annulus(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("annulus_report.schema.json", &doc);
    assert_eq!(doc["transverse"], true);
    assert!(doc["roundtrip_error"].as_f64().unwrap() < 1e-4);
    let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(csv.starts_with("theta,z,r\n"));
    assert_eq!(csv.lines().count(), 1 + 256 * 129);
}

#[test]
fn coarse_annulus_reports_roundtrip_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = annulus(dir.path(), &["--n-theta", "64", "--n-z", "33"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("annulus_report.schema.json", &doc);
    assert!(doc["roundtrip_error"].as_f64().unwrap() > 1e-4);
}

#[test]
fn invalid_input_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let o = knotflow(&["contact", "annulus", "--monodromy", "sin:0,1.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    for bad in [
        vec!["flow", "splitting", "--B", "0.5", "--C", "-0.1"],
        vec!["template", "link", "--m", "0", "--n", "0", "--w1", "xy", "--w2", "yx"],
        vec!["template", "knots", "--m", "0", "--max-len", "3"],
        vec!["frobnicate"],
    ] {
        assert_eq!(knotflow(&bad).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# lorenz\nm = 0\nn = 0\nmax-len = 5\n").unwrap();
    let o = knotflow(&["template", "knots", "--config", cfg.to_str().unwrap(), "--max-len", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    std::fs::write(&cfg, "m=0\nn=0\nmax-len=2\nwhatever=1\n").unwrap();
    let o = knotflow(&["template", "knots", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
