use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn codecnf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codecnf")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = codecnf(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> String {
    let p = path(dir, name);
    let mut args = vec!["generate", "-o", &p];
    args.extend_from_slice(extra);
    ok(&args);
    p
}

#[test]
fn generated_blocked_instance_counts_correctly() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "f.cnf", &["--mode", "blockpw", "-k", "1", "-b", "2", "-n", "6", "--seed", "3"]);
    assert!(ok(&["count", &f]).contains("MATCH"));
    assert!(ok(&["count", &f, "--policy", "max-occurrence", "--no-cache"]).contains("MATCH"));
}

#[test]
fn naive_single_parity_has_size_17() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "a.txt");
    fs::write(&m, "1 2\n11\n").unwrap();
    let out = generate(&dir, "f.cnf", &["--mode", "naive", "-n", "2", "--matrix", &m]);
    let stdout = ok(&["count", &out]);
    assert!(stdout.contains("models=2 oracle=2 MATCH"), "{stdout}");
    let p = path(&dir, "g.cnf");
    let gen = ok(&["generate", "--mode", "naive", "-k", "1", "-b", "1", "-n", "2", "--matrix", &m, "-o", &p]);
    assert!(gen.contains("size=17"), "{gen}");
    let wrong = codecnf(&["generate", "--mode", "naive", "-n", "3", "--matrix", &m, "-o", &p]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn oversized_scope_is_rejected_with_a_hint() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "f.cnf");
    let out = codecnf(&["generate", "--mode", "nd", "-k", "1", "-b", "20", "-c", "32", "--seed", "1", "-o", &p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--abstract"));
    assert!(!Path::new(&p).exists());
}

#[test]
fn analyze_validates_blocked_decomposition() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "f.cnf", &["--mode", "blockpw", "-k", "2", "-b", "2", "-n", "6", "--seed", "9"]);
    let out = ok(&["analyze", &f]);
    assert!(out.contains("modular pathwidth bound: 3 (validated)"), "{out}");
}

#[test]
fn nd_is_independent_of_block_height() {
    let dir = TempDir::new().unwrap();
    let nd = |b: &str| {
        let f = generate(&dir, &format!("nd{b}.cnf"), &["--mode", "nd", "-k", "2", "-b", b, "-c", "1", "--seed", "4"]);
        ok(&["analyze", &f]).lines().find(|l| l.starts_with("neighborhood diversity")).unwrap().to_owned()
    };
    assert_eq!(nd("2"), nd("3"));
}

#[test]
fn external_dimacs_has_no_decomposition() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "ext.cnf");
    fs::write(&f, "p cnf 3 2\n1 -2 0\n2 3 0\n").unwrap();
    let out = ok(&["analyze", &f]);
    assert!(out.contains("decomposition: n/a"), "{out}");
    assert!(ok(&["count", &f]).contains("models=4 oracle=n/a"));
}

#[test]
fn compiled_circuit_passes_check_and_forget() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "f.cnf", &["--mode", "blockpw", "-k", "1", "-b", "2", "-n", "4", "--seed", "2"]);
    let nnf = path(&dir, "f.nnf");
    ok(&["compile", &f, "-o", &nnf]);
    let out = ok(&["check", &nnf]);
    assert!(out.contains("decomposable: ok") && out.contains("deterministic: ok"), "{out}");
    let projected = path(&dir, "x.nnf");
    ok(&["forget", &nnf, "--keep-x-of", &f, "-o", &projected]);
    assert!(ok(&["check", &projected]).contains("decomposable: ok"));
}

#[test]
fn corrupt_inputs_exit_with_error() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.nnf");
    fs::write(&bad, "nnf 2 1 1\nL 1\nA 1 5\n").unwrap();
    assert_eq!(codecnf(&["check", &bad]).status.code(), Some(2));
    assert_eq!(codecnf(&["analyze", &path(&dir, "missing.cnf")]).status.code(), Some(2));
}

#[test]
fn rectcover_finds_and_verifies_a_cover() {
    let dir = TempDir::new().unwrap();
    let t = path(&dir, "eq.tt");
    // x1 = x2 needs one rectangle per agreeing value
    fs::write(&t, "table x1 x2\n9\n").unwrap();
    let cover = path(&dir, "eq.cover");
    let out = ok(&["rectcover", &t, "--beta", "1/2", "-o", &cover]);
    assert!(out.contains("min cover: 2"), "{out}");
    assert!(ok(&["rectcover", &t, "--beta", "1/2", "--cover", &cover]).contains("verified"));
}

#[test]
fn experiment_is_reproducible_and_flags_budget() {
    let dir = TempDir::new().unwrap();
    let grid = path(&dir, "grid.toml");
    fs::write(
        &grid,
        "budget = 60\n\n[[cells]]\nmode = \"blockpw\"\nk = [1]\nb = [2]\nn = [4, 8]\nseeds = [5]\n",
    )
    .unwrap();
    let (a, b) = (path(&dir, "a.txt"), path(&dir, "b.txt"));
    let first = codecnf(&["experiment", &grid, "-o", &a]);
    let second = codecnf(&["experiment", &grid, "-o", &b, "--sequential"]);
    // the n=8 cell exceeds the budget, so the run reports failure
    assert_eq!(first.status.code(), Some(1));
    assert_eq!(second.status.code(), Some(1));
    let report = fs::read_to_string(&a).unwrap();
    assert_eq!(report, fs::read_to_string(&b).unwrap());
    assert!(report.starts_with("codecnf-report v1"));
    assert!(report.contains("BudgetExceeded"), "{report}");
    assert!(report.contains("MATCH ok"), "{report}");
}
