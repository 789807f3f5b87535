use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rendezvous"));
    c.env_remove("RDV_SEED");
    c
}

fn scenarios() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_prints_each_chaser() {
    let o = bin().arg("run").arg(scenarios().join("test03.toml")).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("test03 (seed 3"), "{out}");
    assert!(out.contains("chaser3    Failed - IMU failed"), "{out}");
    assert_eq!(out.matches("Docked at").count(), 2, "{out}");
}

#[test]
fn seed_comes_from_flag_or_env() {
    let o = bin()
        .args(["run", "--seed", "41"])
        .arg(scenarios().join("test01.toml"))
        .output()
        .unwrap();
    assert!(stdout(&o).starts_with("test01 (seed 41"));
    let o = bin()
        .env("RDV_SEED", "42")
        .arg("run")
        .arg(scenarios().join("test01.toml"))
        .output()
        .unwrap();
    assert!(stdout(&o).starts_with("test01 (seed 42"));
}

#[test]
fn udp_transport_gives_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("udp.toml");
    // ephemeral ports so parallel tests never collide
    let text = std::fs::read_to_string(scenarios().join("test02.toml"))
        .unwrap()
        .replace("127.0.0.1:47001", "127.0.0.1:0")
        .replace("127.0.0.1:47002", "127.0.0.1:0")
        .replace("127.0.0.1:48001", "127.0.0.1:0");
    std::fs::write(&path, text).unwrap();
    let inproc = bin().arg("run").arg(&path).output().unwrap();
    let udp = bin().args(["run", "--transport", "udp"]).arg(&path).output().unwrap();
    assert!(udp.status.success(), "{}", String::from_utf8_lossy(&udp.stderr));
    assert_eq!(stdout(&inproc), stdout(&udp));
}

#[test]
fn batch_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("batch")
        .arg(scenarios())
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("13/13 runs with at least two chasers"));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 14);
    for i in 1..=13 {
        assert!(dir.path().join(format!("test{i:02}.json")).is_file());
        assert!(dir.path().join(format!("test{i:02}.csv")).is_file());
    }
}

#[test]
fn export_reproduces_the_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(scenarios().join("test01.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = bin()
        .args(["export", "--format", "csv"])
        .arg(dir.path().join("test01.json"))
        .output()
        .unwrap();
    assert!(o.status.success());
    let written = std::fs::read_to_string(dir.path().join("test01.csv")).unwrap();
    assert_eq!(stdout(&o), written);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let o = bin().args(["run", "/nonexistent/scenario.toml"]).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: /nonexistent/scenario.toml"), "{err}");

    let empty = tempfile::tempdir().unwrap();
    let o = bin().arg("batch").arg(empty.path()).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no scenario files"));
}

#[test]
fn help_mentions_address_overrides() {
    let o = bin().arg("--help").output().unwrap();
    let out = stdout(&o);
    assert!(out.contains("RDV_DETECTION_ADDR") && out.contains("RDV_COMMAND_BASE_ADDR"));
}
