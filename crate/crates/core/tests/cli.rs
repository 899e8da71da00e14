//! End-to-end runs of the binary against the corpus and golden outputs.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::corpus_dir;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Out {
    cli_env(args, &[])
}

fn cli_env(args: &[&str], env: &[(&str, &str)]) -> Out {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_minicminor"));
    cmd.args(args).current_dir(corpus_dir()).env_remove("MINICMINOR_FUEL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().unwrap();
    Out {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn json(o: &Out) -> serde_json::Value {
    serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stdout))
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares against a checked-in file; `UPDATE_GOLDEN=1` rewrites it.
fn assert_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs");
}

#[test]
fn factorial_runs_to_ten_factorial() {
    for sem in ["small", "big"] {
        let o = cli(&["run", "factorial.cmin", "--semantics", sem, "--fuel", "100000", "--json"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v = json(&o);
        assert_eq!(v["status"], "terminated");
        assert_eq!(v["final"]["x"], 3628800);
        assert_eq!(v["trace"], serde_json::json!([]));
    }
}

#[test]
fn going_wrong_is_a_classification() {
    let o = cli(&["run", "bad.cmin"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("status: went_wrong"), "{}", o.stdout);
    let o = cli(&["run", "bad.cmin", "--semantics", "big", "--json", "--check-agreement"]);
    assert_eq!(o.code, 0);
    assert_eq!(json(&o)["status"], "went_wrong");
}

#[test]
fn unroll_removes_the_loop_and_preserves_behavior() {
    let o = cli(&["transform", "factorial.cmin", "--pass", "unroll"]);
    assert_eq!(o.code, 0);
    assert!(!o.stdout.contains("loop"), "{}", o.stdout);
    assert_eq!(o.stdout.matches("x := x * (i + 1)").count(), 10);

    let o = cli(&["diff", "factorial.cmin", "--pass", "unroll", "--json"]);
    assert_eq!(o.code, 0);
    let v = json(&o);
    for k in ["forward", "backward", "equivalence"] {
        assert_eq!(v[k]["holds"], true, "{k}");
    }
}

#[test]
fn mutants_are_reported_as_violations() {
    let o = cli(&["diff", "counter_branch.cmin", "--pass", "unswitch-mutant"]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.starts_with("forward: FAILS"), "{}", o.stdout);
    let o = cli(&["fuzz", "--pass", "unroll-mutant", "--count", "100", "--fuel", "2000"]);
    assert_eq!(o.code, 1);
    let v = json(&o);
    assert!(v["cases_failed"].as_u64().unwrap() > 0);
}

#[test]
fn fuzz_clean_pass_exits_zero() {
    let o = cli(&["fuzz", "--pass", "silentloop", "--count", "100", "--fuel", "2000", "--seed", "5"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let v = json(&o);
    assert_eq!(v["cases_run"], 100);
    assert_eq!(v["failures"], serde_json::json!([]));
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["run", "factorial.cmin", "--fuel", "-3"]).code, 2);
    assert_eq!(cli(&["run", "factorial.cmin", "--semantics", "medium"]).code, 2);
    assert_eq!(cli(&["transform", "factorial.cmin", "--pass", "inline"]).code, 2);
    assert_eq!(cli(&["run", "missing.cmin"]).code, 3);
    let o = cli(&["run", "echo.cmin", "--oracle", "script:[1]"]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("exhausted"), "{}", o.stderr);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("syntax.cmin");
    std::fs::write(&bad, "x := ;").unwrap();
    assert_eq!(cli(&["run", bad.to_str().unwrap()]).code, 3);
}

#[test]
fn fuel_comes_from_the_environment() {
    let o = cli_env(&["run", "factorial.cmin", "--json"], &[("MINICMINOR_FUEL", "5")]);
    assert_eq!(o.code, 0);
    let v = json(&o);
    assert_eq!(v["fuel"], 5);
    assert_eq!(v["status"], "fuel_exhausted");
    let o = cli(&["run", "factorial.cmin", "--json"]);
    assert_eq!(json(&o)["fuel"], 10_000);
    assert_eq!(cli_env(&["run", "factorial.cmin"], &[("MINICMINOR_FUEL", "lots")]).code, 2);
}

#[test]
fn scripted_oracle_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.json");
    std::fs::write(&script, "[4, 5, 6]").unwrap();
    let spec = format!("script:{}", script.display());
    let o = cli(&["run", "echo.cmin", "--oracle", &spec, "--json"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rets: Vec<i64> = json(&o)["trace"].as_array().unwrap().iter().map(|e| e["ret"].as_i64().unwrap()).collect();
    assert_eq!(rets, [4, 5, 6]);
}

#[test]
fn emit_stages_writes_every_intermediate_program() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "transform",
        "factorial.cmin",
        "--pass",
        "unroll,silentloop",
        "--emit-stages",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0);
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["00-input.cmin", "00-input.json", "01-unroll.cmin", "01-unroll.json", "02-silentloop.cmin", "02-silentloop.json"]
    );
    let last = std::fs::read_to_string(dir.path().join("02-silentloop.cmin")).unwrap();
    assert_eq!(last, o.stdout);
}

#[test]
fn golden_outputs() {
    let cases: &[(&str, &[&str])] = &[
        ("run_factorial.json", &["run", "factorial.cmin", "--json"]),
        ("run_bad.json", &["run", "bad.cmin", "--json"]),
        ("run_spin.json", &["run", "spin.cmin", "--json", "--check-agreement"]),
        ("run_echo_big.json", &["run", "echo.cmin", "--semantics", "big", "--oracle", "const:7", "--json"]),
        ("analyze_factorial.json", &["analyze", "factorial.cmin"]),
        ("diff_unswitch.json", &["diff", "unswitch.cmin", "--pass", "unswitch", "--json"]),
        ("transform_unswitch.cmin", &["transform", "unswitch.cmin", "--pass", "unswitch"]),
    ];
    for (name, args) in cases {
        let o = cli(args);
        assert!(o.code == 0, "{name}: {}", o.stderr);
        assert_golden(name, &o.stdout);
    }
}
