use std::process::Command;

fn berezin(args: &[&str]) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_berezin")).args(args).arg("--out").arg(dir.path()).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr))
}

#[test]
fn passing_run_exits_zero() {
    let (code, text) = berezin(&["--experiment", "weyl-window", "--N", "10:40:1"]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("overall: PASS"));
}

#[test]
fn failed_criterion_exits_two() {
    let (code, text) = berezin(&["--experiment", "fock-sharpness", "--n", "1", "--N", "250:1000:x2", "--tol-slope", "0"]);
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("[FAIL]"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["--experiment", "weyl-window", "--n", "2"][..],
        &["--experiment", "fock-sharpness", "--N", "3:1:1"],
        &["--experiment", "no-such-thing"],
        &["--bogus"],
        &[],
    ] {
        let (code, text) = berezin(args);
        assert_eq!(code, 1, "{args:?}: {text}");
    }
}

#[test]
fn help_and_list_exit_zero() {
    assert_eq!(berezin(&["--help"]).0, 0);
    let (code, text) = berezin(&["--list"]);
    assert_eq!(code, 0);
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "experiment = \"fock-sharpness\"\nn = [1]\nN = \"250:1000:x2\"\n[tolerances]\nslope = 0.0\n").unwrap();
    assert_eq!(berezin(&["--config", path.to_str().unwrap()]).0, 2);
    assert_eq!(berezin(&["--config", path.to_str().unwrap(), "--tol-slope", "0.05"]).0, 0);
}
