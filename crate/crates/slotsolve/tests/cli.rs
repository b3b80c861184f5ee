//! End-to-end checks of the `slotsolve` binary: output format, exit codes,
//! flag handling, and byte determinism.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn slotsolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slotsolve")).args(args).output().expect("the binary runs")
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> &str {
    std::str::from_utf8(&out.stderr).expect("stderr is UTF-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated normally")
}

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/models").join(name)
}

#[test]
fn count_mode_prints_the_golden_count() {
    let out = slotsolve(&["nqueens", "4", "--count"]);
    assert_eq!(stdout(&out), "solutions: 2\n");
    assert_eq!(code(&out), 0);
}

#[test]
fn first_mode_prints_one_assignment_in_declaration_order() {
    let out = slotsolve(&["nqueens", "4"]);
    assert_eq!(stdout(&out), "q1=2 q2=4 q3=1 q4=3\n");
    assert_eq!(code(&out), 0);

    let explicit = slotsolve(&["nqueens", "4", "--first"]);
    assert_eq!(stdout(&explicit), stdout(&out));
}

#[test]
fn infeasible_boards_report_unsat_with_exit_one() {
    for args in [&["nqueens", "3", "--first"][..], &["nqueens", "3"][..]] {
        let out = slotsolve(args);
        assert_eq!(stdout(&out), "UNSAT\n");
        assert_eq!(code(&out), 1);
    }
}

#[test]
fn all_mode_lists_every_solution_then_the_count() {
    let out = slotsolve(&["nqueens", "4", "--all"]);
    assert_eq!(stdout(&out), "q1=2 q2=4 q3=1 q4=3\nq1=3 q2=1 q3=4 q4=2\nsolutions: 2\n");
    assert_eq!(code(&out), 0);
}

#[test]
fn zero_count_exits_one() {
    let out = slotsolve(&["nqueens", "2", "--count"]);
    assert_eq!(stdout(&out), "solutions: 0\n");
    assert_eq!(code(&out), 1);

    let all = slotsolve(&["nqueens", "2", "--all"]);
    assert_eq!(stdout(&all), "solutions: 0\n");
    assert_eq!(code(&all), 1);
}

#[test]
fn parse_errors_are_diagnosed_on_stderr_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csp");
    fs::write(&path, "var x in ;\n").unwrap();
    let out = slotsolve(&["solve", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout(&out), "");
    assert!(stderr(&out).contains("1:10"), "diagnostic lacks the position: {}", stderr(&out));
    assert!(stderr(&out).contains("bad.csp"), "diagnostic lacks the file: {}", stderr(&out));
}

#[test]
fn missing_files_and_conflicting_flags_exit_two() {
    let missing = slotsolve(&["solve", "/definitely/not/here.csp"]);
    assert_eq!(code(&missing), 2);
    assert!(!stderr(&missing).is_empty());

    let conflict = slotsolve(&["nqueens", "4", "--all", "--count"]);
    assert_eq!(code(&conflict), 2);

    let zero = slotsolve(&["nqueens", "0"]);
    assert_eq!(code(&zero), 2);
}

#[test]
fn stats_go_to_stderr_not_stdout() {
    let out = slotsolve(&["nqueens", "4", "--count", "--stats"]);
    assert_eq!(stdout(&out), "solutions: 2\n");
    let line = stderr(&out).trim();
    let fields: Vec<&str> = line.split(' ').collect();
    assert_eq!(fields.len(), 3, "unexpected stats shape: {line}");
    for (field, prefix) in fields.iter().zip(["pops=", "invocations=", "prunings="]) {
        let value = field.strip_prefix(prefix).unwrap_or_else(|| panic!("bad stats field {field}"));
        value.parse::<u64>().unwrap_or_else(|_| panic!("non-numeric stats field {field}"));
    }
}

#[test]
fn tracing_writes_deliveries_without_touching_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let quiet = slotsolve(&["nqueens", "4", "--all"]);
    let loud = slotsolve(&["nqueens", "4", "--all", "--trace", trace.to_str().unwrap()]);
    assert_eq!(stdout(&quiet), stdout(&loud));
    assert_eq!(code(&loud), 0);
    let text = fs::read_to_string(&trace).unwrap();
    assert!(!text.is_empty(), "trace file is empty");
    assert!(text.lines().all(|l| l.starts_with("EMIT ")), "unexpected trace line");
}

#[test]
fn output_is_byte_deterministic() {
    for args in [
        &["nqueens", "6", "--all"][..],
        &["solve", model("valid_mixed.csp").to_str().unwrap(), "--all", "--scheme", "variable"][..],
    ] {
        let a = slotsolve(args);
        let b = slotsolve(args);
        assert_eq!(a.stdout, b.stdout, "{args:?} is not deterministic");
        assert_eq!(code(&a), code(&b));
    }
}

#[test]
fn both_schemes_and_complete_mode_agree_on_model_files() {
    let queens = model("valid_queens4.csp");
    let queens = queens.to_str().unwrap();
    for extra in [&[][..], &["--scheme", "variable"][..], &["--complete"][..]] {
        let mut args = vec!["solve", queens, "--count"];
        args.extend_from_slice(extra);
        let out = slotsolve(&args);
        assert_eq!(stdout(&out), "solutions: 2\n", "args = {args:?}");
        assert_eq!(code(&out), 0);
    }
}

#[test]
fn model_files_solve_end_to_end() {
    let out = slotsolve(&["solve", model("valid_mixed.csp").to_str().unwrap(), "--all"]);
    assert_eq!(code(&out), 0);
    let mut lines: Vec<&str> = stdout(&out).lines().collect();
    assert_eq!(lines.pop(), Some("solutions: 4"));
    let found: BTreeSet<&str> = lines.into_iter().collect();
    let expected: BTreeSet<&str> =
        ["w=0 x=1 y=2 z=2", "w=1 x=3 y=0 z=2", "w=2 x=0 y=1 z=2", "w=2 x=3 y=0 z=2"]
            .into_iter()
            .collect();
    assert_eq!(found, expected);

    let unsat = slotsolve(&["solve", model("valid_unsat.csp").to_str().unwrap()]);
    assert_eq!(stdout(&unsat), "UNSAT\n");
    assert_eq!(code(&unsat), 1);
}

#[test]
fn an_empty_model_has_exactly_the_empty_solution() {
    let empty = model("valid_empty.csp");
    let empty = empty.to_str().unwrap();
    let count = slotsolve(&["solve", empty, "--count"]);
    assert_eq!(stdout(&count), "solutions: 1\n");
    assert_eq!(code(&count), 0);

    let first = slotsolve(&["solve", empty]);
    assert_eq!(stdout(&first), "\n");
    assert_eq!(code(&first), 0);
}
