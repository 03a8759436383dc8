// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rabichain"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn figure(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "figures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

const TWO_EVEN: [&str; 4] = ["--couplings", "0.25,0.25", "--splittings", "0.6,0.4"];

#[test]
fn chains_two_qubit_sectors() {
    let v = json(&run(&[
        "chains",
        "--couplings",
        "0.1,0.1",
        "--splittings",
        "0.6,0.4",
        "--json",
    ]));
    assert_eq!(v["plus"], serde_json::json!(["dd", "uu"]));
    assert_eq!(v["minus"], serde_json::json!(["ud", "du"]));
    assert_eq!(v["chains"].as_array().unwrap().len(), 2);
    let b = &v["chains"][0]["blocks"];
    assert_eq!(b[1]["photon"], 1);
    assert_eq!(b[1]["sector"], "-");
}

#[test]
fn chains_three_qubit_sectors() {
    let v = json(&run(&[
        "chains",
        "--couplings",
        "0,0,0",
        "--splittings",
        "0,0,0",
        "--json",
    ]));
    assert_eq!(v["plus"], serde_json::json!(["udd", "dud", "ddu", "uuu"]));
    assert_eq!(v["minus"], serde_json::json!(["ddd", "uud", "udu", "duu"]));
}

#[test]
fn omatrix_rows_and_snap() {
    let v = json(&run(&[
        "omatrix",
        "--couplings",
        "0.5,0.3,0.1",
        "--splittings",
        "1,1,1",
        "--json",
    ]));
    let rows = v["patterns"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3]["expression"], "g1-g2-g3");
    assert_eq!(rows[3]["vector"], serde_json::json!([1.0, -1.0, -1.0, 1.0]));
    assert_eq!(v["zero_modes"].as_array().unwrap().len(), 0);

    let v = json(&run(&[
        "omatrix",
        "--couplings",
        "0.9,0.1,0.2",
        "--splittings",
        "1,1,1",
        "--snap",
        "+--",
        "--json",
    ]));
    assert_eq!(v["patterns"][3]["value"], 0.0);
    assert_eq!(v["zero_modes"], serde_json::json!(["+--"]));

    let v = json(&run(&[
        "omatrix",
        "--couplings",
        "0,0",
        "--splittings",
        "1,1",
        "--json",
    ]));
    assert!(v["patterns"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["value"] == 0.0));
}

#[test]
fn dark_find_two_qubit_even() {
    let mut args = vec!["dark", "find", "--json"];
    args.extend(TWO_EVEN);
    let v = json(&run(&args));
    let c = &v["conditions"][0];
    assert_eq!(c["energy"], 1.0);
    assert_eq!(c["subspace"]["parity"], "+");
    let amps = c["states"][0]["amplitudes"].as_array().unwrap();
    assert_eq!(amps[0]["qubits"], "uu");
    assert!((amps[0]["value"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!(c["states"][0]["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn dark_find_require_exit_code() {
    let out = run(&[
        "dark",
        "find",
        "--require",
        "--couplings",
        "0.3,0.2",
        "--splittings",
        "0.6,0.4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "dark",
        "find",
        "--couplings",
        "0.3,0.2",
        "--splittings",
        "0.6,0.4",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn dark_scan_three_qubit() {
    let v = json(&run(&[
        "dark",
        "scan",
        "--couplings",
        "1.5,1.0,0.5",
        "--splittings",
        "1,1,1",
        "--subspace",
        "0,-",
        "--window",
        "0,3",
        "--json",
    ]));
    let states = v["scans"][0]["states"].as_array().unwrap();
    assert!(states
        .iter()
        .any(|s| (s["energy"].as_f64().unwrap() - 1.0).abs() < 1e-9));
    let out = run(&[
        "dark",
        "scan",
        "--require",
        "--couplings",
        "0.3,0.2",
        "--splittings",
        "0.6,0.4",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dark_verify_pass_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["dark", "find", "--json"];
    args.extend(TWO_EVEN);
    let v = json(&run(&args));
    let mut state = v["conditions"][0]["states"][0].clone();
    state.as_object_mut().unwrap().remove("residual");
    let good = dir.path().join("good.json");
    std::fs::write(&good, state.to_string()).unwrap();
    let mut args = vec!["dark", "verify", "--state", good.to_str().unwrap()];
    args.extend(TWO_EVEN);
    assert_eq!(run(&args).status.code(), Some(0));

    state["amplitudes"][0]["value"] = serde_json::json!(0.9);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, state.to_string()).unwrap();
    let mut args = vec!["dark", "verify", "--state", bad.to_str().unwrap()];
    args.extend(TWO_EVEN);
    assert_eq!(run(&args).status.code(), Some(3));
}

#[test]
fn dark_verify_accepts_find_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("find.json");
    let cfg = figure("three_qubit_line.json");
    let out = run(&[
        "--config",
        &cfg,
        "--json",
        "--out",
        report.to_str().unwrap(),
        "dark",
        "find",
    ]);
    assert!(out.status.success());
    let v = json(&run(&[
        "--config",
        &cfg,
        "--json",
        "dark",
        "verify",
        "--state",
        report.to_str().unwrap(),
    ]));
    assert_eq!(v["passed"], true);

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "{}").unwrap();
    let out = run(&[
        "--config",
        &cfg,
        "dark",
        "verify",
        "--state",
        empty.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spectrum_two_photon_lines() {
    let v = json(&run(&[
        "spectrum",
        "--config",
        &figure("two_photon_lines.json"),
        "--steps",
        "6",
        "--blocks",
        "40",
        "--json",
    ]));
    let lines = v["lines"].as_array().unwrap();
    let has = |i: u64, e: f64| {
        lines.iter().any(|l| {
            l["label"]["i"] == i
                && l["label"]["parity"] == "+"
                && (l["value"].as_f64().unwrap() - e).abs() < 1e-8
        })
    };
    assert!(has(0, 2.0) && has(1, 3.0), "{lines:?}");
    assert!(v["cuts"].as_array().unwrap().is_empty());
}

#[test]
fn spectrum_three_photon_line() {
    let v = json(&run(&[
        "spectrum",
        "--config",
        &figure("three_photon_line.json"),
        "--json",
    ]));
    let lines = v["lines"].as_array().unwrap();
    assert!(lines
        .iter()
        .any(|l| (l["value"].as_f64().unwrap() - 3.0).abs() < 1e-8));
}

#[test]
fn spectrum_stability_gate() {
    let base = [
        "spectrum",
        "--config",
        &figure("two_photon_lines.json"),
        "--s-max",
        "0.7",
        "--steps",
        "8",
        "--blocks",
        "10",
        "--levels",
        "4",
    ];
    let out = run(&base);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').next().unwrap().parse::<f64>().unwrap() < 0.5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped s = 0.5"));

    let mut strict = base.to_vec();
    strict.push("--require-converged");
    assert_eq!(run(&strict).status.code(), Some(2));

    let mut loose = base.to_vec();
    loose.push("--allow-unstable");
    let out = run(&loose);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("0.7,")));
}

#[test]
fn stability_command() {
    let v = json(&run(&[
        "stability",
        "--couplings",
        "0.2,0.2",
        "--splittings",
        "1,1",
        "--photon-order",
        "2",
        "--json",
    ]));
    assert_eq!(v["regime"], "Stable");
    let out = run(&[
        "stability",
        "--couplings",
        "0.3,0.3",
        "--splittings",
        "1,1",
        "--photon-order",
        "2",
        "--require-converged",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&run(&[
        "stability",
        "--couplings",
        "5",
        "--splittings",
        "1",
        "--json",
    ]));
    assert_eq!(v["regime"], "AlwaysStable");
}

#[test]
fn bad_configs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"n_qubits":1,"photon_order":1,"couplings":[0.1],"splittings":[0.1],"extra":1}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["chains", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["chains", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["chains"]).status.code(), Some(1));
    assert_eq!(
        run(&["chains", "--couplings", "0.1", "--splittings", "0.1,0.2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "spectrum",
            "--couplings",
            "0.1",
            "--splittings",
            "0.1",
            "--steps",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
}

#[test]
fn outputs_are_reproducible_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "spectrum",
        "--config",
        &figure("two_photon_lines.json"),
        "--steps",
        "4",
        "--blocks",
        "12",
        "--levels",
        "5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let path = dir.path().join("sweep.csv");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap(), "--threads", "1"]);
    let c = run(&with_out);
    assert!(c.status.success());
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}
