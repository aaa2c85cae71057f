use definetti_cli::{execute, EXIT_CAP, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use serde_json::Value;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> definetti_cli::Outcome {
    execute(std::iter::once("definetti").chain(args.iter().copied()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = run(&["hsep", "--bogus"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stdout.is_empty());
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(out.stdout.contains("verify-definetti"));
}

#[test]
fn dimension_cap_exit_code() {
    let out = run(&["--max-dim", "8", "verify-definetti", "--kind", "projector", "--n", "4", "--d", "2"]);
    assert_eq!(out.code, EXIT_CAP);
}

#[test]
fn bad_decimal_is_usage_error() {
    let out = run(&["repetition-bounds", "--delta", "half"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn missing_operator_file_is_usage_error() {
    let out = run(&["hsep", "--op", "/nonexistent/op.json"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn certificate_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    let fw = dir.path().join("f.json");
    let out = run(&["--seed", "3", "hsep", "--builtin", "singlet", "--cert-out", path_str(&cert), "--fw-cert-out", path_str(&fw)]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);

    for p in [&cert, &fw] {
        let r = run(&["recheck-certificate", path_str(p)]);
        assert_eq!(r.code, EXIT_PASS, "{}", r.stdout);
    }

    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    c["claimed_value"] = Value::from(0.6);
    let tampered = dir.path().join("t.json");
    std::fs::write(&tampered, c.to_string()).unwrap();
    assert_eq!(run(&["recheck-certificate", path_str(&tampered)]).code, EXIT_FAIL);

    let mut f: Value = serde_json::from_str(&std::fs::read_to_string(&fw).unwrap()).unwrap();
    let w = f["atoms"][0]["weight"].as_f64().unwrap();
    f["atoms"][0]["weight"] = Value::from(w + 0.3);
    std::fs::write(&tampered, f.to_string()).unwrap();
    let r = run(&["recheck-certificate", path_str(&tampered)]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.stdout.contains("reason"));

    std::fs::write(&tampered, "{\"kind\": \"product_value\"}").unwrap();
    assert_eq!(run(&["recheck-certificate", path_str(&tampered)]).code, EXIT_USAGE);
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["--out", path_str(&path), "verify-classical"]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["suite"], "verify-classical");
    assert_eq!(v["pass"], true);
}

#[test]
fn csv_has_generic_header() {
    let out = run(&["--format", "csv", "verify-pinching", "--instances", "3"]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(out.stdout.starts_with("suite,anchor,seed,params,value,gap,bound,tolerance,pass\n"));
    assert_eq!(out.stdout.lines().count(), 4);
}

#[test]
fn seed_falls_back_to_environment() {
    let bin = env!("CARGO_BIN_EXE_definetti");
    let via_env = Command::new(bin).args(["verify-pinching", "--instances", "2"]).env("DEFINETTI_SEED", "42").output().unwrap();
    let via_flag =
        Command::new(bin).args(["--seed", "42", "verify-pinching", "--instances", "2"]).env_remove("DEFINETTI_SEED").output().unwrap();
    assert_eq!(via_env.status.code(), Some(EXIT_PASS));
    assert_eq!(via_env.stdout, via_flag.stdout);
    let v: Value = serde_json::from_slice(&via_env.stdout).unwrap();
    assert_eq!(v["seed"], 42);
}

#[test]
fn flag_seed_overrides_environment() {
    let bin = env!("CARGO_BIN_EXE_definetti");
    let out = Command::new(bin).args(["--seed", "5", "verify-classical"]).env("DEFINETTI_SEED", "9").output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 5);
}

#[test]
fn printed_bounds_are_exact_decimals() {
    let out = run(&["repetition-bounds", "--mode", "printed", "--delta", "0.5", "--r", "1", "--n", "10"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    let r = out.report.unwrap();
    let rec = r.records.iter().find(|x| x.anchor == "bound-hsep-power").unwrap();
    assert!(rec.exact.is_some());
}
