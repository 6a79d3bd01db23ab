use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobolev-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_THEOREM11: &str = r#"{
  "seed": 11,
  "sweep": {"a": 2.0, "m": 8},
  "experiment": {
    "name": "theorem11",
    "potential": {"kind": "random_bounded", "l_max": 2, "t_end": 2.0, "cells": 4, "bound": 1.0},
    "ensemble": 2,
    "n_max": 8,
    "t_list": [1.0, 2.0],
    "tol": 1e-7
  }
}"#;

#[test]
fn zero_potential_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"a": 1.0, "m": 8},
            "experiment": {"name": "theorem11", "potential": {"kind": "zero"},
                           "ensemble": 1, "n_max": 4, "t_list": [1.0, 2.0]}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["theorem11", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let ratios = std::fs::read_to_string(out.join("ratios.csv")).unwrap();
    assert!(ratios.starts_with("member,T,lhs,"));
    assert!(out.join("manifest.json").exists() && out.join("summary.json").exists());
}

#[test]
fn malformed_config_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"a": 1.0, "m": 8, "bogus": 3}, "experiment": {"name": "wkb"}}"#,
    );
    let o = run(&["wkb", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep"));

    let o = run(&["lemma22", "--kM", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.m"));

    let o = run(&["evolve", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_1_naming_the_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"a": 1.0, "m": 8},
            "experiment": {"name": "growth",
                           "potential": {"kind": "random_complex", "l_max": 2, "t_end": 2.0, "cells": 4, "bound": 1.0},
                           "n_max": 8, "t_list": [1.0, 2.0], "theta_max": -100.0}}"#,
    );
    let o = run(&["growth", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("growth.theta_bound"));
}

#[test]
fn csv_outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL_THEOREM11);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = run(&[
            "theorem11",
            "--config",
            &cfg,
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.code().unwrap() <= 1);
        outputs.push(out);
    }
    for name in ["ratios.csv", "sweep.csv"] {
        let a = std::fs::read(outputs[0].join(name)).unwrap();
        let b = std::fs::read(outputs[1].join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs");
    }
}
