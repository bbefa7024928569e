//! Acceptance criterion 9: repeated runs of `validate` and `sweep` with
//! equal seeds produce byte-identical outputs.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greedcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_9_output_determinism() {
    let sweep_args = ["sweep", "--formula", "wang", "--k-max", "25"];
    let a = run(&sweep_args);
    let b = run(&sweep_args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout, "sweep output not byte-identical");

    let dir = tempfile::tempdir().unwrap();
    let vdir = dir.path().join("v");
    let validate_args = [
        "validate",
        "--seed",
        "99",
        "--count",
        "150",
        "--adaptive-count",
        "20",
        "--out",
        vdir.to_str().unwrap(),
    ];
    let a = run(&validate_args);
    let b = run(&validate_args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout, "validate output not byte-identical");

    println!("criterion 9 (byte-identical seeded outputs): PASS");
}
