mod common;

use std::collections::BTreeMap;
use std::process::Command;

use common::cli_cases::{analysis_files, fixtures, invocations, run_into};

#[test]
fn every_subcommand_is_deterministic() {
    let f = fixtures();
    let outs = tempfile::tempdir().unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for (label, args) in invocations(&f) {
        seen.insert(args[0].clone());
        let a = outs.path().join(format!("{label}-a"));
        let b = outs.path().join(format!("{label}-b"));
        assert_eq!(run_into(&args, &a), 0, "{label} failed");
        assert_eq!(run_into(&args, &b), 0, "{label} failed on rerun");
        let (fa, fb) = (analysis_files(&a), analysis_files(&b));
        assert!(!fa.is_empty(), "{label} wrote nothing");
        assert_eq!(fa, fb, "{label} outputs differ between runs");

        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["status"], "ok");
        assert_eq!(manifest["subcommand"], args[0].as_str());
        let listed: Vec<String> = manifest["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        let mut listed_sorted = listed.clone();
        listed_sorted.sort();
        assert_eq!(listed_sorted, fa.keys().cloned().collect::<Vec<_>>(), "{label} manifest outputs");
        let sha = manifest["inputs"][0]["sha256"].as_str().unwrap();
        assert_eq!(sha.len(), 64);
    }
    assert_eq!(seen.len(), 18, "all subcommands exercised");
}

#[test]
fn expected_output_names() {
    let f = fixtures();
    let outs = tempfile::tempdir().unwrap();
    let expect: BTreeMap<&str, &[&str]> = BTreeMap::from([
        ("lin", &["report.json", "coefficients.csv", "comparisons.csv"][..]),
        ("knn", &["model.json", "predictions.csv"][..]),
        ("forest", &["importance.json", "model.json", "predictions.csv"][..]),
        ("ohunt", &["tau.json", "tau.csv"][..]),
        ("fair-ridge", &["model.json", "predictions.csv"][..]),
        ("eval", &["eval.json", "eval.csv"][..]),
        ("iamb", &["graph.json", "graph.dot"][..]),
        ("plot-scatter3d", &["scatter3d.json", "scatter3d.csv", "scatter3d.svg"][..]),
    ]);
    for (label, args) in invocations(&f) {
        let Some(names) = expect.get(label) else { continue };
        let dir = outs.path().join(label);
        assert_eq!(run_into(&args, &dir), 0);
        for n in *names {
            assert!(dir.join(n).is_file(), "{label}: missing {n}");
        }
    }
    let preds = std::fs::read_to_string(outs.path().join("fair-ridge/predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 4);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairscope"))
}

#[test]
fn missing_required_flag_exits_2_without_files() {
    let f = fixtures();
    let out = tempfile::tempdir().unwrap();
    let target = out.path().join("o");
    let res = binary()
        .args(["lin", "--data"])
        .arg(&f.law)
        .args(["--s", "race1", "--out-dir"])
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("--y"));
    assert!(!target.exists());
}

#[test]
fn data_errors_exit_1_and_still_write_manifest() {
    let f = fixtures();
    let out = tempfile::tempdir().unwrap();
    let res = binary()
        .args(["lin", "--data"])
        .arg(&f.law)
        .args(["--y", "lsat", "--s", "no_such_column", "--out-dir"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).starts_with("error:"));
    let manifest = std::fs::read_to_string(out.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"error\""));

    let res = binary().args(["iamb", "--data", "/nonexistent.csv"]).output().unwrap();
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn help_for_every_subcommand_exits_0() {
    let f = fixtures();
    for (_, args) in invocations(&f) {
        let res = binary().args([args[0].as_str(), "--help"]).output().unwrap();
        assert_eq!(res.status.code(), Some(0), "{} --help", args[0]);
        let text = String::from_utf8_lossy(&res.stdout);
        for flag in ["--data", "--out-dir", "--seed"] {
            assert!(text.contains(flag), "{} help lacks {flag}", args[0]);
        }
    }
}

#[test]
fn seed_env_fallback() {
    let f = fixtures();
    let out = tempfile::tempdir().unwrap();
    let res = binary()
        .env("FAIRSCOPE_SEED", "42")
        .args(["ohunt", "--data"])
        .arg(&f.recid)
        .args(["--y", "two_year_recid", "--s", "race", "--out-dir"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 42);
}
