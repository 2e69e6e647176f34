use std::process::Command;

fn camhull(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_camhull")).args(args).output().unwrap()
}

#[test]
fn preset_then_evaluate_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    let out = camhull(&["preset", "wall-door-scan", "--out", root]);
    assert!(out.status.success());
    let config = dir.path().join("config.toml");
    let config = config.to_str().unwrap();
    let out = camhull(&["evaluate", "--config", config, "--x", "0.25", "--threads", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("coverage: "), "{stdout}");
    assert!(dir.path().join("out/membership_t1.voxa").exists());
}

#[test]
fn optimize_logs_one_line_per_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    assert!(camhull(&["preset", "wall-door-scan", "--out", root]).status.success());
    let config = dir.path().join("config.toml");
    let out = camhull(&["optimize", "--config", config.to_str().unwrap(), "--no-timing"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let trace = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert_eq!(stderr.lines().filter(|l| l.starts_with("eval ")).count(), trace.lines().count() - 1);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let out = camhull(&["scan", "--config", "/nonexistent/config.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error: reading /nonexistent/config.toml"));
    let out = camhull(&["preset", "nope", "--out", "/tmp"]);
    assert!(!out.status.success());
}

#[test]
fn formats_prints_the_reference() {
    let out = camhull(&["formats"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("VOXA v1"));
}
