use std::fs;
use std::process::{Command, Output};

use cablegrip::builtin::Z230_SCENE;
use cablegrip::log::STEP_LOG_HEADER;

fn cablegrip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cablegrip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    cablegrip(args).status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.scene");
    fs::write(&good, Z230_SCENE).unwrap();
    let out = cablegrip(&["validate", "--scene", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("26 statics, 9 components"));

    let bad = dir.path().join("bad.scene");
    fs::write(&bad, Z230_SCENE.replacen("depth = 8.0", "depth = -8.0", 1)).unwrap();
    let out = cablegrip(&["validate", "--scene", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ram1"));

    let missing = dir.path().join("nope.scene");
    assert_eq!(code(&["validate", "--scene", missing.to_str().unwrap()]), 3);
}

#[test]
fn run_writes_a_step_log() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("task2.csv");
    let out = cablegrip(&["run", "--task", "task2", "--step", "1", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("task task2: success"));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), STEP_LOG_HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').count() == STEP_LOG_HEADER.len()));
}

#[test]
fn run_failures_exit_one() {
    let out = cablegrip(&["run", "--task", "task2", "--body-width", "45"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("failure (collision"));
    let out = cablegrip(&["run", "--task", "task3b_naive"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("collision"));
}

#[test]
fn run_from_script_files() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("t.task");
    fs::write(
        &script,
        "id = \"lift\"\ntargets = []\n[[phases]]\ntype = \"move_to\"\n\
         carriage = { translation = [250.0, 250.0, 450.0], quaternion = [0.0, 1.0, 0.0, 0.0] }\n",
    )
    .unwrap();
    assert_eq!(code(&["run", "--script", script.to_str().unwrap()]), 0);

    fs::write(&script, "id = \"bad\"\ntargets = [\"ram9\"]\nphases = []\n").unwrap();
    assert_eq!(code(&["run", "--script", script.to_str().unwrap()]), 2);

    fs::write(&script, "id = \"bad\"\ntargets = []\n[[phases]]\ntype = \"release\"\n").unwrap();
    assert_eq!(code(&["run", "--script", script.to_str().unwrap()]), 2);
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(code(&[]), 3);
    assert_eq!(code(&["frobnicate"]), 3);
    assert_eq!(code(&["run"]), 3);
    assert_eq!(code(&["run", "--task", "task9"]), 3);
    assert_eq!(code(&["run", "--task", "task1", "--step", "0"]), 3);
    assert_eq!(code(&["run", "--task", "task1", "--script", "x.task"]), 3);
    assert_eq!(code(&["check-decoupling", "--grid", "1"]), 3);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn check_decoupling_passes_on_bundled_routes() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("grid.csv");
    let out = cablegrip(&["check-decoupling", "--grid", "5", "--out", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("decoupled"));
    let text = fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("qw,phi1,phi2,residual_j1,residual_j2"));

    // shift the jaw1 guide cap off the yaw axis
    let scene = dir.path().join("coupled.scene");
    let moved = Z230_SCENE
        .replacen("decoupled = true", "decoupled = false", 1)
        .replacen("guide_cap = [5.0, 0.0, 0.0]", "guide_cap = [5.0, 1.0, 0.0]", 1);
    fs::write(&scene, moved).unwrap();
    let out = cablegrip(&["check-decoupling", "--scene", scene.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("coupled"));
}

#[test]
fn fk_prints_tips() {
    let out = cablegrip(&["fk", "--jaw1", "30deg", "--jaw2", "-30deg"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // 2 * 30 * sin(30deg)
    assert!(text.contains("opening: 30.000000"), "{text}");
    assert!(text.contains("cable jaw1:"));
    assert_eq!(code(&["fk", "--wrist-yaw", "2.0"]), 2);
    assert_eq!(code(&["fk", "--jaw1", "abc"]), 3);
}
