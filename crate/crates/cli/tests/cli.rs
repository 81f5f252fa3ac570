use std::process::{Command, Output};

fn qdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn run_is_deterministic_and_decodes() {
    let args = ["run", "--variant", "p1", "--message", "0x4fa1", "--seed", "7"];
    let a = qdc(&args);
    let b = qdc(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "same flags + seed must be byte-identical");
    let v = stdout_json(&a);
    assert_eq!(v["transcript"]["decoded_hex"], "4fa1");
    assert_eq!(v["auth_accepted"], true);
    assert_eq!(v["seed"], 7);
}

#[test]
fn run_multiparty_decodes_both_messages() {
    let out = qdc(&[
        "run", "--variant", "mp1", "--message", "0xab", "--message-b", "0110",
        "--seed", "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["transcript"]["decoded_hex"], "ab");
    assert_eq!(v["transcript"]["decoded_bits_b"], "0110");
}

#[test]
fn run_reads_seed_from_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_qdc"))
        .args(["run", "--message", "1011"])
        .env("QDC_SIM_SEED", "123")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["seed"], 123);
}

#[test]
fn run_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("transcript.json");
    let out = qdc(&[
        "run", "--message", "0x0f", "--seed", "4", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["transcript"]["decoded_hex"], "0f");
}

#[test]
fn run_rejects_malformed_message() {
    let out = qdc(&["run", "--message", "zz"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_rejects_message_b_on_two_party_variant() {
    let out = qdc(&["run", "--message", "01", "--message-b", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn attacked_run_aborts() {
    let out = qdc(&[
        "run", "--message", "0x0123456789ab", "--seed", "3", "--attack", "eve-z",
        "--check-count", "16", "--ecc", "identity",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["transcript"]["accepted"], false);
}

#[test]
fn tables_match_simulation() {
    let out = qdc(&["tables"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["consistent"], true);
    assert_eq!(v["p1"].as_array().unwrap().len(), 8);
    assert_eq!(v["mp1"].as_array().unwrap().len(), 16);
}

#[test]
fn corrupted_table_detected() {
    let out = qdc(&["tables", "--corrupt", "p1"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("table p1"), "names the offending table: {stderr}");
}

#[test]
fn verify_checks_all_pass() {
    let out = qdc(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let passes = stdout.lines().filter(|l| l.starts_with("PASS ")).count();
    assert!(passes >= 20, "expected at least 20 checks, saw {passes}");
    assert!(!stdout.contains("FAIL "), "{stdout}");
}

#[test]
fn attack_report_masked_leaks_nothing() {
    let out = qdc(&[
        "attack", "--strategy", "zlw-p1", "--apply-h", "--trials", "2000",
        "--seed", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["exact"]["mi_bits"], 0.0);
    let emp = v["empirical"]["guess_accuracy"].as_f64().unwrap();
    assert!((emp - 0.25).abs() < 0.05, "blind guessing, got {emp}");
}

#[test]
fn attack_rejects_apply_h_for_eve() {
    let out = qdc(&["attack", "--strategy", "eve-intercept", "--apply-h"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn auth_demo_exit_codes() {
    let honest = qdc(&["auth-demo", "--seed", "1"]);
    assert_eq!(honest.status.code(), Some(0));
    let imp = qdc(&["auth-demo", "--seed", "1", "--adversary", "impersonate"]);
    assert_eq!(imp.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let out = qdc(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let unknown = qdc(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));
}
