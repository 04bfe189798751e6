use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_z4kagome"))
}

fn code_of(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn verify_perturbation_passes() {
    let (code, out) = code_of(&["verify", "perturbation"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS ")));
    assert!(out.contains("q=63/8"));
}

#[test]
fn bad_configuration_exits_with_two() {
    assert_eq!(code_of(&["threshold", "--trials", "0"]).0, 2);
    assert_eq!(code_of(&["threshold", "--L", "7"]).0, 2);
    assert_eq!(code_of(&["threshold", "--noise", "loud"]).0, 2);
    assert_eq!(code_of(&["lifetime", "--lambda", "-1"]).0, 2);
    assert_eq!(code_of(&["verify", "nothing"]).0, 2);
    assert_eq!(code_of(&["synth", "--n", "1", "--word", "Q0"]).0, 2);
}

#[test]
fn threshold_csv_and_config_precedence() {
    let dir = std::env::temp_dir().join(format!("z4kagome-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "L = 4\np-min = 0.0\np-max = 0.0\np-steps = 1\ntrials = 5\nobservable = X1,Z1\nworkers = 1\n").unwrap();
    let (code, out) = code_of(&["--config", cfg.to_str().unwrap(), "threshold", "--trials", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out, "observable,L,p,trials,failures,p_logical,stderr\nX1,4,0.000000,3,0,0.000000,0.000000\nZ1,4,0.000000,3,0,0.000000,0.000000\n");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(code_of(&["--config", cfg.to_str().unwrap(), "threshold"]).0, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn synth_emits_one_gate_per_token() {
    let out = bin().args(["synth", "--n", "2", "--word", "H0 CX0,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let tokens: Vec<&str> = text.split_whitespace().collect();
    assert!(!tokens.is_empty());
    assert!(tokens.iter().all(|t| ["S0", "S1", "T0", "T1", "Z0", "Z1", "CZ0,1"].contains(t)), "{text}");
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS"));
}

#[test]
fn validate_reports_every_check() {
    let (code, out) = code_of(&["validate", "--L", "4,6"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 10);
}
