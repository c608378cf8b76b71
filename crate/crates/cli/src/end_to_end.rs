//! Whole commands run in-process against temporary directories.

use std::fs;
use std::path::Path;

use clap::Parser;
use serde_json::Value;

use crate::error::{EXIT_INVALID, EXIT_OUTPUT};
use crate::{run, Cli, CliError};

fn exec(args: &[&str]) -> Result<String, CliError> {
    let mut full = vec!["ssrbell"];
    full.extend_from_slice(args);
    run(&Cli::try_parse_from(full).expect("arguments parse"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn surface_values(path: &Path) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["angle1", "angle2", "bell_term"]);
    r.records().map(|row| row.unwrap()[2].parse().unwrap()).collect()
}

#[test]
fn surface_of_single_particle_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bec1.csv");
    exec(&["surface", "--family", "bec", "--n", "1", "--resolution", "101", "--out", out.to_str().unwrap()]).unwrap();
    let values = surface_values(&out);
    assert_eq!(values.len(), 101 * 101);
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    assert!((max - 2.41).abs() <= 0.01, "{max}");
    let side = json(&dir.path().join("bec1.json"));
    assert_eq!(side["state"]["family"], "bec");
    assert_eq!(side["violation"], true);
    assert!((side["max_value"].as_f64().unwrap() - max).abs() < 1e-10);
}

#[test]
fn flat_surface_without_squeezing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c0.csv");
    exec(&["surface", "--family", "squeezed", "--c", "0.0", "--resolution", "21", "--out", out.to_str().unwrap()])
        .unwrap();
    let v = surface_values(&out);
    let spread = v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min);
    assert!(spread <= 1e-10, "{spread}");
}

#[test]
fn degenerate_surface_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tiny.csv");
    exec(&["surface", "--n", "1", "--resolution", "2", "--fixed-angles", "0,1", "--out", out.to_str().unwrap()])
        .unwrap();
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 3));
    assert_eq!(json(&dir.path().join("tiny.json"))["fixed_from_optimum"], false);
}

#[test]
fn optimize_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("opt.json");
    exec(&["optimize", "--family", "bec", "--n", "2", "--out", out.to_str().unwrap()]).unwrap();
    let r = json(&out);
    assert!((r["best_value"].as_f64().unwrap() - 2.36).abs() <= 0.01);
    assert_eq!(r["grid_resolution"], 64);
    assert_eq!(r["refined"], true);
    assert_eq!(r["best_settings"]["phi_a1"], 0.0);

    let text = exec(&["optimize", "--family", "toy_mixed", "--p", "0.5", "--co-optimize"]).unwrap();
    let r: Value = serde_json::from_str(&text).unwrap();
    assert!(r["best_value"].as_f64().unwrap() <= 2.0 + 1e-9);
    assert_eq!(r["violation"], false);
    assert_eq!(r["co_optimized"]["violation"], false);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "family = bec\nn = 2\nrefine = false\nresolution = 16\n").unwrap();
    let text = exec(&["optimize", "--config", cfg.to_str().unwrap(), "--n", "1"]).unwrap();
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["config"]["n"], 1);
    assert_eq!(r["refined"], false);
    assert_eq!(r["grid_resolution"], 16);
}

#[test]
fn diagnostics() {
    let s: Value = serde_json::from_str(&exec(&["squeezing", "--family", "squeezed", "--c", "0"]).unwrap()).unwrap();
    assert!(s["sz_variance"]["value"].is_null());
    assert!(s["sz_variance"]["undefined_reason"].is_string());
    let e: Value = serde_json::from_str(&exec(&["entropy", "--n", "1"]).unwrap()).unwrap();
    assert!((e["projected_entropy"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let c: Value = serde_json::from_str(&exec(&["cglmp", "--n", "1", "--resolution", "16"]).unwrap()).unwrap();
    assert_eq!(c["d"], 3);
    assert_eq!(c["violation"], false);
}

#[test]
fn errors_map_to_exit_codes() {
    let bad = exec(&["optimize", "--family", "noon", "--n", "2", "--m", "1"]).unwrap_err();
    assert_eq!(bad.exit_code(), EXIT_INVALID);
    let mixed = exec(&["entropy", "--family", "toy_mixed", "--p", "0.2"]).unwrap_err();
    assert_eq!(mixed.exit_code(), EXIT_INVALID);
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub/out.csv");
    let unwritable = exec(&["surface", "--n", "1", "--resolution", "2", "--out", target.to_str().unwrap()]).unwrap_err();
    assert_eq!(unwritable.exit_code(), EXIT_OUTPUT);
    let missing = exec(&["optimize", "--config", dir.path().join("none.conf").to_str().unwrap()]).unwrap_err();
    assert_eq!(missing.exit_code(), EXIT_INVALID);
}

#[test]
fn reproduce_rejects_family_flags() {
    assert!(exec(&["reproduce", "postselect", "--family", "bec"]).is_err());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        exec(&["reproduce", "fig5", "--resolution", "11", "--out", dir.path().to_str().unwrap()]).unwrap();
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 7);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}
