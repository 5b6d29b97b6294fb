use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> String {
    repo().join("fixtures/v1").join(rel).to_string_lossy().into_owned()
}

fn kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kit"))
        .args(args)
        .env("KIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo().join("schemas/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("valid schema")
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = validator().iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{:?}", errors);
}

#[test]
fn check_exit_codes() {
    let ok = kit(&["check", &fixture("structures/exterior.json")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_valid(&report(&ok));

    let bad = kit(&["check", &fixture("structures/exterior_mutated.json")]);
    assert_eq!(bad.status.code(), Some(1));
    let r = report(&bad);
    assert_valid(&r);
    assert_eq!(r["report"]["associativity"].as_array().unwrap().len(), 1);

    let curved = kit(&["check", &fixture("structures/curved_constant.json")]);
    assert_eq!(curved.status.code(), Some(2));
    assert!(curved.stdout.is_empty());

    let missing = kit(&["check", "/nonexistent/file.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn parse_errors_report_a_location() {
    let dir = std::env::temp_dir().join(format!("kit-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\n  \"objects\": [\"L\"],\n  \"hom\": {\n}").unwrap();
    let out = kit(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn total_isolates_the_failing_condition() {
    let ok = kit(&["total", &fixture("total/all_complex.json")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_valid(&report(&ok));

    let h = kit(&["total", &fixture("total/all_complex_h_zero.json")]);
    assert_eq!(h.status.code(), Some(1));
    let r = report(&h);
    assert_eq!(r["report"]["h_equation"], Value::Bool(false));
    assert_eq!(r["report"]["delta_closed"], Value::Bool(true));

    let d = kit(&["total", &fixture("total/exterior_delta_not_closed.json")]);
    assert_eq!(d.status.code(), Some(1));
    let r = report(&d);
    assert_eq!(r["report"]["delta_closed"], Value::Bool(false));
    assert_eq!(r["report"]["h_equation"], Value::Bool(true));
}

#[test]
fn signs_gamma_homology_spectrum_morse() {
    let s = kit(&["signs", "--max-kl", "2", "--max-j", "2", "--max-n", "1", "--max-degree", "1"]);
    assert_eq!(s.status.code(), Some(0));
    let r = report(&s);
    assert_valid(&r);
    assert!(r["report"]["checked"].as_u64().unwrap() > 0);

    let g = kit(&["gamma", &fixture("strips/e_minus_one.json")]);
    assert_eq!(g.status.code(), Some(0));
    let r = report(&g);
    assert_valid(&r);
    let gamma = r["report"]["gamma"].as_f64().unwrap();
    assert!((gamma - (std::f64::consts::E - 1.0)).abs() < 1e-4, "{}", gamma);

    let h = kit(&["homology", &fixture("complexes/cone_identity.json")]);
    assert_eq!(h.status.code(), Some(0));
    let r = report(&h);
    assert_valid(&r);
    assert_eq!(r["report"]["acyclic"], Value::Bool(true));

    let t = kit(&["homology", &fixture("complexes/times_two.json")]);
    assert_eq!(report(&t)["report"]["homology"]["1"]["torsion"], serde_json::json!([2]));

    let sp = kit(&["spectrum"]);
    assert_eq!(sp.status.code(), Some(0));
    assert_valid(&report(&sp));
    assert_eq!(kit(&["spectrum", "--alpha", "0"]).status.code(), Some(2));

    let m = kit(&["morse", &fixture("morse/small_r.json")]);
    assert_eq!(m.status.code(), Some(0));
    let r = report(&m);
    assert_valid(&r);
    assert_eq!(r["report"]["scan"]["smallest_r_with_solution"], Value::Null);
    assert!(String::from_utf8_lossy(&m.stderr).contains("orbit"));
}

#[test]
fn window_too_small_is_an_input_error() {
    let text = std::fs::read_to_string(fixture("strips/e_minus_one.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["window"] = serde_json::json!([0.5, 2.0]);
    let dir = std::env::temp_dir().join(format!("kit-cli-window-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("strip.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = kit(&["gamma", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = kit(&["total", &fixture("total/thimble.json")]);
    let b = kit(&["total", &fixture("total/thimble.json")]);
    assert_eq!(a.stdout, b.stdout);
    let c = kit(&["morse", &fixture("morse/flipped.json")]);
    let d = kit(&["morse", &fixture("morse/flipped.json")]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn thread_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_kit"))
        .args(["homology", &fixture("complexes/times_two.json")])
        .env("KIT_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(report(&out)["meta"]["threads"], 3);
    let out = kit(&["--threads", "1", "homology", &fixture("complexes/times_two.json")]);
    assert_eq!(report(&out)["meta"]["threads"], 1);
}
