//! End-to-end runs of the scenario binary: determinism, formats, exit codes.

use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_cmonoids")
}

fn scenario_path(name: &str) -> String {
    format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(exe()).args(args).output().expect("run cli")
}

#[test]
fn remark313_report_is_deterministic_and_correct() {
    let path = scenario_path("remark313.txt");
    let first = run(&["--scenario", &path]);
    assert!(first.status.success());
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.contains("classes: 9"), "{stdout}");
    assert!(stdout.contains("seminormal: false"), "{stdout}");
    assert!(stdout.contains("counterexample: p1^3*p2"), "{stdout}");
    assert!(stdout.contains("Z/1"), "{stdout}");
    // byte-identical on a second run
    let second = run(&["--scenario", &path]);
    assert_eq!(second.stdout, stdout.as_bytes());
}

#[test]
fn records_format_is_line_structured() {
    let path = scenario_path("remark313.txt");
    let out = run(&["--scenario", &path, "--format", "records"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for line in stdout.lines() {
        assert!(line.starts_with("cmonoids/1 "), "bad record line: {line}");
    }
    assert!(
        stdout.contains("analysis=seminormal verdict=false"),
        "{stdout}"
    );
}

#[test]
fn example43_scenario_runs_all_analyses() {
    let path = scenario_path("example43_n1.txt");
    let out = run(&["--scenario", &path, "--seed", "42"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("classes: 6"), "{stdout}");
    assert!(stdout.contains("seminormal: true"), "{stdout}");
    assert!(stdout.contains("half-factorial: true"), "{stdout}");
    assert!(
        stdout.contains("T1 pass, T2 pass, lengths pass"),
        "{stdout}"
    );
    assert!(stdout.contains("isomorphic: true"), "{stdout}");
}

#[test]
fn verdicts_do_not_affect_exit_code() {
    // a non-seminormal monoid still exits 0
    let path = scenario_path("b_s3.txt");
    let out = run(&["--scenario", &path]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("seminormal: false"), "{stdout}");
}

#[test]
fn generators_scenario_runs() {
    let path = scenario_path("numerical23.txt");
    let out = run(&["--scenario", &path]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("classes: 3"), "{stdout}");
    assert!(stdout.contains("seminormal: false"), "{stdout}");
}

#[test]
fn parse_errors_exit_nonzero_with_line_numbers() {
    let dir = std::env::temp_dir().join(format!("cmonoids-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.txt");
    std::fs::write(&path, "monoid: remark313\nanalyses: bogus\n").unwrap();
    let out = run(&["--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "{stderr}");

    std::fs::write(&path, "monoid: remark313\n").unwrap();
    let out = run(&["--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("analyses"), "{stderr}");
}

#[test]
fn missing_scenario_flag_is_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn remark313_matches_golden_files() {
    let path = scenario_path("remark313.txt");
    let text = run(&["--scenario", &path]);
    assert!(text.status.success());
    let golden = include_str!("golden_remark313.txt");
    assert_eq!(
        String::from_utf8(text.stdout).unwrap(),
        golden,
        "text report drifted from the golden file"
    );
    let records = run(&["--scenario", &path, "--format", "records"]);
    let golden = include_str!("golden_remark313_records.txt");
    assert_eq!(
        String::from_utf8(records.stdout).unwrap(),
        golden,
        "record stream drifted from the golden file"
    );
}

#[test]
fn example43_matches_golden_file() {
    let path = scenario_path("example43_n1.txt");
    let out = run(&["--scenario", &path]);
    assert!(out.status.success());
    let golden = include_str!("golden_example43_n1.txt");
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden,
        "example43 report drifted from the golden file"
    );
}
