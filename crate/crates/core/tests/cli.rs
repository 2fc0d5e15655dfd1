use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn nt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nt")).args(args).output().unwrap()
}

fn program(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/programs")
        .join(name);
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_reports_ok() {
    let path = program("valid/attention.nt");
    let out = nt(&["check", &path]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), format!("{path}: ok\n"));
}

#[test]
fn check_reports_located_errors() {
    let path = program("invalid/rename_collision.nt");
    let out = nt(&["check", &path]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with(&format!("{path}:4:5: error: ")), "{stderr}");
    assert!(stderr.trim_end().ends_with("[NameCollision]"));
}

#[test]
fn eval_seed_changes_random_inputs() {
    let path = program("valid/feedforward.nt");
    let a = stdout(&nt(&["eval", &path, "--seed", "1"]));
    let b = stdout(&nt(&["eval", &path, "--seed", "1"]));
    let c = stdout(&nt(&["eval", &path, "--seed", "2"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("# X3\nshape: out=2\n"));
}

#[test]
fn grad_prints_jacobian() {
    let dir = std::env::temp_dir().join(format!("nt-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("square.nt");
    fs::write(&path, "x = [1, 2, 3] over (a)\ny = x * x\n").unwrap();
    let out = nt(&["grad", path.to_str().unwrap(), "--of", "y", "--wrt", "x"]);
    fs::remove_dir_all(&dir).unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# dy/dx"));
    assert_eq!(lines.next(), Some("shape: a=3, a'=3"));
    let diag: Vec<f64> = lines
        .flat_map(|l| {
            l.split_whitespace()
                .map(|v| v.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .collect();
    assert_eq!(diag, [2., 0., 0., 0., 4., 0., 0., 0., 6.]);
}

#[test]
fn zoo_list_and_run() {
    let list = stdout(&nt(&["zoo", "list"]));
    assert_eq!(list.lines().count(), namedtensor::zoo::fixtures().len());
    let run = nt(&["zoo", "run", "bayes", "--seed", "4"]);
    assert!(run.status.success());
    assert!(stdout(&run).starts_with("bayes seed=4 max_abs_deviation="));
    assert!(stdout(&run).trim_end().ends_with(" ok"));
    assert_eq!(nt(&["zoo", "run", "nonesuch"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_an_io_error() {
    assert_eq!(nt(&["check", "/nonexistent/x.nt"]).status.code(), Some(2));
}
