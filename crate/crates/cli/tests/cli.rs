use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn brownsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brownsim"))
        .args(args)
        .env_remove("BROWNSIM_TOLERANCE")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

fn basis_state(index: usize, amps: &[(usize, f64)]) -> Value {
    let mut a = vec![serde_json::json!([0.0, 0.0]); 1 << index];
    for (i, x) in amps {
        a[*i] = serde_json::json!([x, 0.0]);
    }
    serde_json::json!({"n": index, "amps": a})
}

#[test]
fn prepare_circuit_reports_unit_fidelity() {
    let out = brownsim(&["prepare", "--variant", "circuit"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["n_qubits"], 5);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"] == "circuit_fidelity" && c["pass"] == true));
    assert!(checks
        .iter()
        .any(|c| c["name"] == "ub_signed_permutation" && c["pass"] == true));
}

#[test]
fn equal_weights_reproduce_literal_state() {
    let literal = json(&brownsim(&["prepare"]));
    let weighted = json(&brownsim(&[
        "prepare",
        "--variant",
        "weighted",
        "--w",
        "0.5,0.5,0.5,0.5",
    ]));
    assert_eq!(literal["state"], weighted["state"]);
}

#[test]
fn generalized_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.json");
    let out = brownsim(&[
        "prepare",
        "--variant",
        "generalized",
        "--n",
        "2",
        "--eta",
        "00,11,10,01",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(saved["state"]["n"], 7);
    assert_eq!(saved, json(&out));
}

#[test]
fn prepare_rejects_bad_parameters() {
    assert_eq!(
        code(&brownsim(&["prepare", "--variant", "weighted", "--w", "1,1,1,1"])),
        2
    );
    assert_eq!(code(&brownsim(&["prepare", "--variant", "weighted"])), 2);
    assert_eq!(code(&brownsim(&["prepare", "--variant", "generalized", "--n", "1"])), 2);
    assert_eq!(code(&brownsim(&["prepare", "--n", "2"])), 2);
}

#[test]
fn diagnose_brown_ghz_and_product() {
    let dir = tempfile::tempdir().unwrap();
    let brown = dir.path().join("brown.json");
    brownsim(&["prepare", "--out", brown.to_str().unwrap()]);
    let out = brownsim(&["diagnose", brown.to_str().unwrap(), "--expect-brown"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["s1"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["s2"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let r = 0.5f64.sqrt();
    let ghz = write(dir.path(), "ghz.json", &basis_state(5, &[(0, r), (31, r)]));
    let out = brownsim(&["diagnose", &ghz, "--expect-brown"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"mems_s2"));
    assert!(!failed.contains(&"mems_s1"));

    let zero = write(dir.path(), "zero.json", &basis_state(5, &[(0, 1.0)]));
    let out = brownsim(&["diagnose", &zero]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for r in v["one_vs_rest"]
        .as_array()
        .unwrap()
        .iter()
        .chain(v["two_vs_rest"].as_array().unwrap())
    {
        assert!(r["entropy"].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn teleport_with_explicit_draw() {
    let out = brownsim(&["run", "teleport1", "--secret", "0.6,0.8", "--draw", "0.1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["transcript"]["events"][0]["label"], "a1+");
    assert_eq!(v["transcript"]["total_cbits"], 2);
    assert_eq!(v["audit"]["pass"], true);
}

#[test]
fn dense_message_zero() {
    let out = brownsim(&["run", "dense", "--message", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["decoded"], 0);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.json",
        &serde_json::json!({"alpha": 0.5, "mu": [0.0, 0.5], "gamma": -0.5, "beta": 0.5}),
    );
    let a = brownsim(&["run", "qsts2", "--secret-file", &s, "--seed", "7"]);
    let b = brownsim(&["run", "qsts2", "--secret-file", &s, "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    for p in ["teleport1", "teleport2", "qsts1a", "qsts1b", "qsts2", "dense"] {
        let a = brownsim(&["run", p, "--seed", "99"]);
        let b = brownsim(&["run", p, "--seed", "99"]);
        assert_eq!(code(&a), 0, "{p}");
        assert_eq!(a.stdout, b.stdout, "{p}");
        assert_ne!(a.stdout, brownsim(&["run", p, "--seed", "100"]).stdout, "{p}");
    }
}

#[test]
fn recorded_draws_replay_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = json(&brownsim(&["run", "qsts1b", "--seed", "5"]));
    let secret = write(dir.path(), "secret.json", &a["secret"]);
    let draws: Vec<String> = a["draws"].as_array().unwrap().iter().map(|d| d.to_string()).collect();
    let b = json(&brownsim(&[
        "run",
        "qsts1b",
        "--secret-file",
        &secret,
        "--draws",
        &draws.join(","),
    ]));
    assert_eq!(a["transcript"], b["transcript"]);
}

#[test]
fn lost_message_fails_with_exit_one() {
    let out = brownsim(&[
        "run",
        "teleport1",
        "--secret",
        "0.6,0.8",
        "--draws",
        "0.6",
        "--drop",
        "0",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn verify_tables_lists_findings_and_exits_zero() {
    let out = brownsim(&["verify-tables"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let verdicts = v["verdicts"].as_array().unwrap();
    let first = verdicts
        .iter()
        .find(|x| x["table"] == "teleport_one" && x["entry"] == "a1+" && x["field"] == "basis")
        .unwrap();
    assert_eq!(first["matches"], true);
    for m in verdicts.iter().filter(|x| x["matches"] == false) {
        assert!(m["canonical"].is_string(), "{m}");
    }
    assert!(verdicts
        .iter()
        .any(|x| x["table"] == "dense" && x["matches"] == false && x["amplitude_diff"].as_f64().unwrap() > 0.0));
}

#[test]
fn audit_accepts_runs_and_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let run = json(&brownsim(&["run", "teleport2", "--seed", "1"]));
    let file = write(dir.path(), "run.json", &run);
    let out = brownsim(&["audit", &file]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["pass"], true);

    let mut t = run["transcript"].clone();
    let events = t["events"].as_array_mut().unwrap();
    let i = events.iter().position(|e| e["kind"] == "message").unwrap();
    events[i]["bits"] = Value::from("0");
    events[i]["width"] = Value::from(1);
    let file = write(dir.path(), "tampered.json", &t);
    let out = brownsim(&["audit", &file]);
    assert_eq!(code(&out), 1);
    let checks = json(&out)["checks"].clone();
    let width = checks
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "message_width")
        .unwrap();
    assert_eq!(width["pass"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        code(&brownsim(&["run", "teleport1", "--seed", "1", "--draws", "0.1"])),
        2
    );
    assert_eq!(code(&brownsim(&["run", "teleport3"])), 2);
    assert_eq!(code(&brownsim(&["run", "teleport1", "--draws", "0.1,0.2"])), 2);
    assert_eq!(code(&brownsim(&["run", "teleport2", "--secret", "1,0"])), 2);
    assert_eq!(code(&brownsim(&["--tolerance", "0", "verify-tables"])), 2);
    assert_eq!(code(&brownsim(&["audit", "/nonexistent/run.json"])), 2);
    assert_eq!(code(&brownsim(&[])), 2);
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_brownsim"))
        .args(["run", "teleport1", "--seed", "2"])
        .env("BROWNSIM_TOLERANCE", "0.001")
        .output()
        .unwrap();
    assert_eq!(json(&out)["tolerance"], 0.001);
    let out = Command::new(env!("CARGO_BIN_EXE_brownsim"))
        .args(["verify-tables"])
        .env("BROWNSIM_TOLERANCE", "-3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn text_format() {
    let out = brownsim(&[
        "run",
        "teleport1",
        "--secret",
        "0.6,0.8",
        "--draw",
        "0.1",
        "--format",
        "text",
    ]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("Alice -> Bob: 00"));
    assert!(s.trim_end().ends_with("PASS"));
}
