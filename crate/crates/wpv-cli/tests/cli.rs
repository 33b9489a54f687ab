//! Process-level checks of the `wpv` binary: pinned output bytes, exit
//! codes, determinism, and cache behavior.

use std::path::Path;
use std::process::{Command, Output};

fn wpv() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wpv"));
    cmd.env_remove("WPV_CACHE");
    cmd
}

fn run(args: &[&str]) -> Output {
    wpv().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn pinned_volume_output() {
    let out = run(&["volume", "--g", "1", "--n", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "(q1 + 4*P)/48\n");

    let out = run(&["volume", "--g", "0", "--n", "4", "--normalized"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "1 + q1 + q2 + q3 + q4\n");
}

#[test]
fn pinned_intersection_output() {
    let out = run(&["intersect", "--g", "0", "--kappa", "2", "--psi", "0,0,0,0,0"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "5\n");
}

#[test]
fn output_is_byte_deterministic() {
    let first = run(&["table", "--dmax", "2", "--format", "json"]);
    let second = run(&["table", "--dmax", "2", "--format", "json"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let first = run(&["verify", "virasoro", "--gmax", "1", "--nmax", "2", "--kmax", "2"]);
    let second = run(&[
        "verify",
        "virasoro",
        "--gmax",
        "1",
        "--nmax",
        "2",
        "--kmax",
        "2",
        "--parallelism",
        "3",
    ]);
    assert!(first.status.success(), "{}", stderr_of(&first));
    assert_eq!(
        first.stdout, second.stdout,
        "verification output must not depend on thread count"
    );
}

#[test]
fn usage_errors_exit_two() {
    let unstable = run(&["volume", "--g", "0", "--n", "2"]);
    assert_eq!(unstable.status.code(), Some(2));
    assert!(stderr_of(&unstable).contains("unstable"));

    let missing = run(&["volume", "--g", "1"]);
    assert_eq!(missing.status.code(), Some(2));

    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    let bad_tol = run(&["verify", "kernel", "--tolerance", "-1"]);
    assert_eq!(bad_tol.status.code(), Some(2));
    assert!(stderr_of(&bad_tol).contains("tolerance"));
}

#[test]
fn verification_failure_exits_one() {
    // A tolerance far below attainable float accuracy cannot converge; the
    // failure must surface as exit code 1, not as a hang or a pass.
    let out = run(&["verify", "kernel", "--kmax", "0", "--tolerance", "1e-16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("FAIL"));
}

#[test]
fn cache_round_trip_skips_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("brackets.jsonl");
    let cache_str = cache.to_str().unwrap();

    let first = run(&["intersect", "--g", "1", "--kappa", "1", "--psi", "1,0", "--cache", cache_str]);
    assert!(first.status.success());
    assert!(stderr_of(&first).contains("loaded 0 entries"));
    assert!(cache.exists(), "cache file must be written");

    let second = run(&["intersect", "--g", "1", "--kappa", "1", "--psi", "1,0", "--cache", cache_str]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(
        stderr_of(&second).contains("computed 0 new"),
        "second run must answer entirely from the cache: {}",
        stderr_of(&second)
    );
}

#[test]
fn cache_env_fallback_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_cache = dir.path().join("env.jsonl");
    let flag_cache = dir.path().join("flag.jsonl");

    // WPV_CACHE alone routes the cache to the environment path.
    let out = wpv()
        .args(["intersect", "--g", "0", "--kappa", "0", "--psi", "0,0,0"])
        .env("WPV_CACHE", &env_cache)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_cache.exists());

    // An explicit --cache flag wins over the environment.
    let out = wpv()
        .args(["intersect", "--g", "0", "--kappa", "1", "--psi", "0,0,0,0"])
        .env("WPV_CACHE", dir.path().join("ignored.jsonl"))
        .args(["--cache", flag_cache.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(flag_cache.exists());
    assert!(!dir.path().join("ignored.jsonl").exists());
}

#[test]
fn corrupt_cache_warns_and_recomputes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("brackets.jsonl");
    let cache_str = cache.to_str().unwrap();
    let args = ["intersect", "--g", "1", "--kappa", "0", "--psi", "1"];

    let clean = run(&[&args[..], &["--cache", cache_str]].concat());
    assert!(clean.status.success());

    let text = std::fs::read_to_string(&cache).unwrap();
    std::fs::write(&cache, text.replace("1/24", "1/25")).unwrap();

    let tainted = run(&[&args[..], &["--cache", cache_str]].concat());
    assert!(tainted.status.success());
    assert!(stderr_of(&tainted).contains("stale cache"));
    assert_eq!(clean.stdout, tainted.stdout, "a bad cache must cost, not corrupt");
}

#[test]
fn emit_formats_are_well_formed() {
    let out = run(&["emit", "G", "--gmax", "1", "--nmax", "1", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid json");
    assert_eq!(value["series"], "G");
    assert!(value["data"]["terms"].as_array().map_or(0, Vec::len) >= 2);

    let latex = run(&["emit", "f", "--gmax", "1", "--nmax", "1", "--format", "latex"]);
    assert!(latex.status.success());
    assert!(stdout_of(&latex).contains("t_{1}"));
}

#[test]
fn verify_suites_pass_at_shipping_windows() {
    let kdv = run(&["verify", "kdv", "--gmax", "1", "--nmax", "4"]);
    assert!(kdv.status.success(), "{}", stdout_of(&kdv));

    let cross = run(&["verify", "cross", "--dmax", "2"]);
    assert!(cross.status.success(), "{}", stdout_of(&cross));

    let kernel = run(&["verify", "kernel", "--kmax", "2"]);
    assert!(kernel.status.success(), "{}", stdout_of(&kernel));
}

#[test]
fn cache_info_and_clear() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("brackets.jsonl");
    let cache_str = cache.to_str().unwrap();

    let absent = run(&["cache", "info", "--cache", cache_str]);
    assert!(absent.status.success());
    assert!(stdout_of(&absent).contains("absent"));

    run(&["intersect", "--g", "1", "--kappa", "0", "--psi", "1", "--cache", cache_str]);
    let info = run(&["cache", "info", "--cache", cache_str]);
    assert!(stdout_of(&info).contains("entries"));

    let clear = run(&["cache", "clear", "--cache", cache_str]);
    assert!(clear.status.success());
    assert!(!Path::new(cache_str).exists());

    let no_path = run(&["cache", "info"]);
    assert_eq!(no_path.status.code(), Some(2));
}
