use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

const FACTORIAL: &str = r#"{"epsilon": 1, "q": "0", "mu": 1, "nu": 0, "factors": [{"alpha": 1, "beta": 0, "lambda": 1}], "poly": ["1"]}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_padic-series"));
    cmd.env_remove("PADIC_PRECISION");
    cmd
}

fn spec_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn temp_json(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn json_run(args: &[&str]) -> (Output, Value) {
    let out = bin().arg("--json").args(args).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)));
    (out, v)
}

fn ok_payload(args: &[&str]) -> Value {
    let (out, v) = json_run(args);
    assert!(out.status.success(), "{v}");
    assert_eq!(v["status"], "ok");
    v["payload"].clone()
}

#[test]
fn valuation_examples() {
    assert_eq!(
        ok_payload(&["valuation", "--factorial", "10", "--p", "2"])["valuation"],
        8
    );
    assert_eq!(
        ok_payload(&["valuation", "--rational", "3/4", "--p", "2"])["valuation"],
        -2
    );
    assert_eq!(
        ok_payload(&["valuation", "--rational", "0", "--p", "5"])["valuation"],
        "infinity"
    );
}

#[test]
fn parse_errors_carry_position() {
    let (out, v) = json_run(&["valuation", "--rational", "12/x", "--p", "3"]);
    assert!(!out.status.success());
    assert_eq!(v["status"], "error");
    assert!(v["diagnostics"][0].as_str().unwrap().contains("position 3"));
}

#[test]
fn composite_modulus_is_rejected() {
    let (out, v) = json_run(&["valuation", "--factorial", "5", "--p", "6"]);
    assert!(!out.status.success());
    assert!(v["diagnostics"][0]
        .as_str()
        .unwrap()
        .contains("not a prime"));
}

#[test]
fn ukvk_five() {
    let p = ok_payload(&["ukvk", "--k", "5"]);
    assert_eq!((p["u"].as_str(), p["v"].as_str()), (Some("9"), Some("5")));
    let g = ok_payload(&["ukvk", "--k", "5", "--general"]);
    assert_eq!(g["general"]["c0"], "9C_5 - 2C_4 - C_3 + C_2");
}

#[test]
fn exp_domain_at_two() {
    let spec = spec_dir().join("exp.json");
    let p = ok_payload(&["domain", "--spec", spec.to_str().unwrap(), "--p", "2"]);
    assert_eq!(p["v_min"], 2);
}

#[test]
fn factorial_sum_is_ten_mod_sixteen() {
    let f = temp_json(FACTORIAL);
    let p = ok_payload(&[
        "sum",
        "--spec",
        f.path().to_str().unwrap(),
        "--p",
        "2",
        "-N",
        "4",
    ]);
    assert_eq!(p["residue"], "10");
    assert_eq!(p["value"]["digits"], serde_json::json!([1, 0, 1]));
    assert_eq!(p["value"]["valuation"], 1);
    assert!(p["terms_used"].as_u64().unwrap() >= 4);
}

#[test]
fn n_factorial_n_is_minus_one() {
    let spec = spec_dir().join("factorial_n.json");
    let p = ok_payload(&[
        "sum",
        "--spec",
        spec.to_str().unwrap(),
        "--p",
        "3",
        "-N",
        "10",
    ]);
    assert_eq!(p["residue"], "59048");
}

#[test]
fn precision_from_environment() {
    let f = temp_json(FACTORIAL);
    let out = bin()
        .env("PADIC_PRECISION", "4")
        .args([
            "--json",
            "sum",
            "--spec",
            f.path().to_str().unwrap(),
            "--p",
            "2",
        ])
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["payload"]["precision"], 4);
    assert_eq!(v["payload"]["residue"], "10");
}

#[test]
fn outside_domain_reports_the_domain() {
    let f = temp_json(FACTORIAL);
    let (out, v) = json_run(&[
        "sum",
        "--spec",
        f.path().to_str().unwrap(),
        "--p",
        "2",
        "--x",
        "1/2",
    ]);
    assert!(!out.status.success());
    assert_eq!(v["status"], "error");
    assert_eq!(v["payload"]["domain"]["v_min"], 0);
    assert_eq!(v["payload"]["x_valuation"], -1);
}

#[test]
fn decay_boundary() {
    let f = temp_json(FACTORIAL);
    let path = f.path().to_str().unwrap();
    let on = ok_payload(&["decay-check", "--spec", path, "--p", "5", "--x", "1"]);
    assert_eq!(on["verdict"], "decaying");
    let off = ok_payload(&["decay-check", "--spec", path, "--p", "5", "--x", "1/5"]);
    assert_eq!(off["verdict"], "not_decaying");
}

#[test]
fn telescope_with_generator_file() {
    let a = temp_json(r#"["1", "0", "1"]"#);
    let spec = spec_dir().join("factorial.json");
    let p = ok_payload(&[
        "telescope",
        "--spec",
        spec.to_str().unwrap(),
        "--generator",
        a.path().to_str().unwrap(),
        "--primes",
        "2,3,5",
        "-N",
        "12",
    ]);
    assert_eq!(p["rhs"], "-1");
    assert_eq!(
        p["assignment"]["verified_primes"],
        serde_json::json!([2, 3, 5])
    );
}

#[test]
fn real_classification() {
    let exp = spec_dir().join("exp.json");
    assert_eq!(
        ok_payload(&["real-classify", "--spec", exp.to_str().unwrap()])["kind"],
        "converges_everywhere"
    );
    let f = temp_json(FACTORIAL);
    assert_eq!(
        ok_payload(&["real-classify", "--spec", f.path().to_str().unwrap()])["kind"],
        "diverges_for_all_nonzero_x"
    );
}

#[test]
fn adele_h_series() {
    let p = ok_payload(&[
        "adele-check",
        "h-series",
        "--mu",
        "2",
        "--nu",
        "1",
        "--x",
        "1/3",
        "--p-max",
        "13",
        "-N",
        "8",
    ]);
    assert!(p["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["status"] == "pass"));
}

#[test]
fn corpus_small_grid_and_jobs_agree() {
    let grid = temp_json(
        r#"{"primes": [2, 5], "precision": 8, "beta": [0, 2], "q": ["0", "1"],
            "c": ["1", "-1", "1/2", "0", "3"],
            "a16": {"epsilon": [-1], "k": [2], "alpha_profiles": [[1, 2]]}}"#,
    );
    let path = grid.path().to_str().unwrap();
    let seq = ok_payload(&["--jobs", "1", "corpus", "--grid", path]);
    let par = ok_payload(&["--jobs", "2", "corpus", "--grid", path]);
    assert_eq!(seq, par);
    assert_eq!(seq["skipped"].as_array().unwrap().len(), 1);
    let ids: std::collections::BTreeSet<_> = seq["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["id"].to_string())
        .collect();
    assert_eq!(ids.len(), 16);
}

#[test]
fn corpus_rejects_bad_grid() {
    let grid = temp_json(r#"{"primes": [4]}"#);
    let (out, v) = json_run(&["corpus", "--grid", grid.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(v["status"], "error");
}

#[test]
fn json_output_is_stable() {
    let spec = spec_dir().join("factorial.json");
    let args = [
        "sum",
        "--spec",
        spec.to_str().unwrap(),
        "--p",
        "7",
        "-N",
        "6",
        "--trace",
    ];
    let a = bin().arg("--json").args(args).output().unwrap().stdout;
    let b = bin().arg("--json").args(args).output().unwrap().stdout;
    assert_eq!(a, b);
}

#[test]
fn human_output() {
    let out = bin().args(["ukvk", "--k", "4"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        "(u_4, v_4) = (-2, -5)"
    );
}
