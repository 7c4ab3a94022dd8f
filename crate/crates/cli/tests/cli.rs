// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk")).args(args).env_remove("QWALK_THREADS").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn bundled(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

fn csv_total(csv: &str) -> f64 {
    csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn entry(m: &Value, i: usize, j: usize) -> (f64, f64) {
    let z = &m[i][j];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

fn line_config(steps: usize, extra: &str) -> String {
    line_config_on(r#"{"kind":"line"}"#, steps, extra)
}

fn line_config_on(lattice: &str, steps: usize, extra: &str) -> String {
    format!(
        r#"{{"schema":1,"name":"probe","lattice":{lattice},"coin":{{"name":"hadamard2"}},
            "chirality":[[1,0],[0,0]],"steps":{steps}{extra}}}"#
    )
}

#[test]
fn hadamard_line_distribution_is_normalized() {
    let dir = TempDir::new().unwrap();
    let out = qwalk(&["run", "--config", &bundled("fig1_hadamard_line.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "fig1_hadamard_line.csv");
    assert!(csv.starts_with("x,probability\n"));
    assert!((csv_total(&csv) - 1.0).abs() < 1e-9);
    let manifest: Value = serde_json::from_str(&read(dir.path(), "fig1_hadamard_line_manifest.json")).unwrap();
    assert!(manifest["norm_drift"].as_f64().unwrap() < 1e-9);
    assert_eq!(manifest["config"]["steps"], 500);
    assert_eq!(manifest["outputs"][0]["file"], "fig1_hadamard_line.csv");
}

#[test]
fn zero_steps_gives_the_initial_point_mass() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &line_config(0, r#","site":[3]"#));
    let out = qwalk(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path(), "probe.csv"), "x,probability\n3,1.0\n");
}

#[test]
fn threestep_graphene_collapses_to_one_site() {
    let dir = TempDir::new().unwrap();
    let out = qwalk(&["run", "--config", &bundled("fig12_graphene_threestep.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = read(dir.path(), "fig12_graphene_threestep.csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{csv}");
    assert!(rows[0].starts_with("0,0,0,"));
    assert!((csv_total(&csv) - 1.0).abs() < 1e-9);
    assert_eq!(read(dir.path(), "fig12_graphene_threestep_xy.csv").lines().count(), 2);
}

#[test]
fn shift_sign_flag_mirrors_the_walk() {
    let dir = TempDir::new().unwrap();
    let json = std::fs::read_to_string(bundled("fig12_graphene_threestep.json")).unwrap().replace("\"steps\": 200", "\"steps\": 1");
    let cfg = write_config(&dir, "one.json", &json);
    let d = dir.path().to_str().unwrap();
    for (sign, site) in [("paper", "-1,1,-1,"), ("mirrored", "1,-1,1,")] {
        let out = qwalk(&["run", "--config", &cfg, "--out", d, "--shift-sign", sign]);
        assert_eq!(code(&out), 0);
        let csv = read(dir.path(), "fig12_graphene_threestep.csv");
        assert!(csv.lines().nth(1).unwrap().starts_with(site), "{sign}: {csv}");
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &line_config(40, r#","record_every":10"#));
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = qwalk(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--snapshot"]);
        assert_eq!(code(&out), 0);
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["probe.csv", "probe_t0.csv", "probe_t20.csv", "probe_t40.csv", "probe_state.json"] {
        assert_eq!(read(&a, file), read(&b, file), "{file}");
    }
    let strip = |p: &PathBuf| {
        let mut v: Value = serde_json::from_str(&read(p, "probe_manifest.json")).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_seconds");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn invalid_configs_exit_2() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let cases = [
        line_config(5, "").replace("hadamard2", "grover4"),
        line_config(5, r#","mode":"three-step""#),
        line_config(5, "").replace("[[1,0],[0,0]]", "[[1,0],[0,0],[0,0]]"),
        line_config(5, r#","colour":"red""#),
        "{not json".to_string(),
    ];
    for (i, json) in cases.iter().enumerate() {
        let cfg = write_config(&dir, &format!("bad{i}.json"), json);
        let out = qwalk(&["run", "--config", &cfg, "--out", d]);
        assert_eq!(code(&out), 2, "case {i}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&qwalk(&["run", "--config", "/nonexistent.json"])), 2);
    assert_eq!(code(&qwalk(&["frobnicate"])), 2);
}

#[test]
fn boundary_hit_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &line_config_on(r#"{"kind":"line","extent":3}"#, 10, ""));
    let out = qwalk(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("would leave the lattice"));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &line_config(3, ""));
    let d = dir.path().to_str().unwrap();
    let with = |n: &str| Command::new(env!("CARGO_BIN_EXE_qwalk")).args(["run", "--config", &cfg, "--out", d]).env("QWALK_THREADS", n).output().unwrap();
    assert_eq!(code(&with("2")), 0);
    assert_eq!(code(&with("0")), 2);
    assert_eq!(code(&with("many")), 2);
}

#[test]
fn variance_of_y_line_matches_reference_polynomial() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = bundled("fig3_variance_y_line.json");
    let out = qwalk(&["variance", "--config", &cfg, "--out", d, "--reference", "0.47175578,0.00091395,0.29289026", "--tol-rel", "0.02"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["comparison"]["pass"], true);
    assert_eq!(report["samples"], 500);
    let csv = read(dir.path(), "fig3_variance_y_line_variance.csv");
    assert!(csv.starts_with("t,variance\n1,"));
    assert_eq!(csv.lines().count(), 501);
    assert_eq!(read(dir.path(), "fig3_variance_y_line_fit.json"), String::from_utf8(out.stdout).unwrap());

    // A reference the fit misses exits 1 but still writes the report.
    std::fs::remove_file(dir.path().join("fig3_variance_y_line_fit.json")).unwrap();
    let out = qwalk(&["variance", "--config", &cfg, "--out", d, "--reference", "0,0,0.5", "--tol-rel", "0.02"]);
    assert_eq!(code(&out), 1);
    assert!(dir.path().join("fig3_variance_y_line_fit.json").exists());
    assert_eq!(stdout_json(&out)["comparison"]["coefficients"][2]["pass"], false);
}

#[test]
fn threestep_variance_is_zero() {
    let dir = TempDir::new().unwrap();
    let out = qwalk(&[
        "variance",
        "--config",
        &bundled("fig14_variance_graphene_threestep.json"),
        "--out",
        dir.path().to_str().unwrap(),
        "--reference",
        "0,0,0",
        "--tol-abs",
        "1e-12",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_json(&out)["fit"]["c2"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn synthetic_series_from_stdin_recovers_coefficients() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("t,variance\n");
    for t in 1..=40u32 {
        let t = f64::from(t);
        csv.push_str(&format!("{t},{}\n", 2.0 + 3.0 * t + 4.0 * t * t));
    }
    let mut child = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["variance", "--series", "-", "--out", dir.path().to_str().unwrap(), "--reference", "2,3,4", "--tol-abs", "1e-8", "--gate-all"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(csv.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let fit = &stdout_json(&out)["fit"];
    for (key, want) in [("c0", 2.0), ("c1", 3.0), ("c2", 4.0)] {
        assert!((fit[key].as_f64().unwrap() - want).abs() < 1e-8, "{key}: {fit}");
    }
    assert!(dir.path().join("series_fit.json").exists());

    let bad = write_config(&dir, "bad.csv", "time,value\n1,2\n");
    assert_eq!(code(&qwalk(&["variance", "--series", &bad, "--out", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn derive_grover4_hamiltonian() {
    let out = qwalk(&["derive", "grover4"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    let h = &report["hamiltonian"];
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { -3.0 * PI / 4.0 } else { PI / 4.0 };
            let (re, im) = entry(h, i, j);
            assert!((re - want).abs() < 1e-9 && im.abs() < 1e-9, "H[{i}][{j}] = {re} + {im}i");
        }
    }
    assert!(report["round_trip_residual"].as_f64().unwrap() < 1e-9);
    assert!(report["involution"]["max_deviation"].as_f64().unwrap() < 1e-9);
}

#[test]
fn derive_identity_is_zero() {
    let out = qwalk(&["derive", "identity(2)"]);
    assert_eq!(code(&out), 0);
    let h = &stdout_json(&out)["hamiltonian"];
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(entry(h, i, j), (0.0, 0.0));
        }
    }
    assert_eq!(code(&qwalk(&["derive", "hadamard3"])), 2);
    assert_eq!(code(&qwalk(&["derive", "so2(x)"])), 2);
}

#[test]
fn oracle_check_cases() {
    for (lattice, mode, coin, extent) in
        [("line", "additive", "hadamard2", "3"), ("square", "two-step", "dft4", "3"), ("graphene", "additive", "dft3", "2")]
    {
        let out = qwalk(&["oracle-check", "--lattice", lattice, "--mode", mode, "--coin", coin, "--extent", extent]);
        assert_eq!(code(&out), 0, "{lattice} {mode} {coin}: {}", String::from_utf8_lossy(&out.stderr));
        let report = stdout_json(&out);
        assert!(report["max_deviation"].as_f64().unwrap() <= 1e-12);
        assert_eq!(report["probes"], 3);
    }
    let too_large = qwalk(&["oracle-check", "--lattice", "graphene", "--coin", "dft3", "--extent", "6"]);
    assert_eq!(code(&too_large), 3);
    let wrong_mode = qwalk(&["oracle-check", "--lattice", "line", "--mode", "two-step", "--coin", "hadamard2"]);
    assert_eq!(code(&wrong_mode), 2);
}

#[test]
fn list_coins_json_has_the_registry() {
    let out = qwalk(&["list-coins", "--json"]);
    assert_eq!(code(&out), 0);
    let coins = stdout_json(&out);
    let names: Vec<&str> = coins.as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names.len(), 9);
    for name in ["hadamard2", "y2", "hadamard4", "grover4", "dft4", "grover3", "dft3"] {
        assert!(names.contains(&name), "{name}");
    }
    let table = String::from_utf8(qwalk(&["list-coins"]).stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("identity(d)")));
}
