use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simplex-bernstein")).args(args).output().unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn sharp_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = run(&["sharp", "--d", "2", "--kappa", "0,0,0", "--n", "1..6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["pass"], true);
    let csv = fs::read_to_string(out.join("detail_constants.csv")).unwrap();
    assert!(csv.lines().count() > 6 * 4);
    assert!(!csv.contains('\r'));
}

#[test]
fn spectral_radial_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = run(&["spectral", "--d", "3", "--check", "radial", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("detail_operator.csv")).unwrap();
    assert!(table.lines().skip(1).all(|l| l.contains(",radial,")));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["sharp", "--n", "5..3"][..],
        &["sharp", "--kappa", "0,0"],
        &["sharp", "--tol", "nonsense=1"],
        &["lp", "--weight", "jacobi:0,0,0,0"],
        &["sharp", "--bogus"],
        &["render", "--out", "/nonexistent/report"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = run(&["sharp", "--n", "5..3"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn tolerance_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = run(&["sharp", "--n", "2..3", "--tol", "projection=-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let summary = fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"pass\": false"));
}

#[test]
fn reports_are_byte_identical_and_render_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let args: &[&[&str]] = &[
        &["lp", "--n", "2..4", "--p", "1,inf", "--check", "sweep", "--seed", "7"],
        &["spectral", "--n", "0..3", "--kappa", "0.5,1,0", "--seed", "7"],
    ];
    for (k, a) in args.iter().enumerate() {
        let first = dir.path().join(format!("a{k}"));
        let second = dir.path().join(format!("b{k}"));
        for out in [&first, &second] {
            let mut full = a.to_vec();
            full.extend(["--out", out.to_str().unwrap()]);
            assert!(run(&full).status.code().unwrap() <= 1);
            assert_eq!(run(&["render", "--out", out.to_str().unwrap()]).status.code(), Some(0));
        }
        assert_eq!(files(&first), files(&second));
        let before = files(&first);
        assert_eq!(run(&["render", "--out", first.to_str().unwrap()]).status.code(), Some(0));
        assert_eq!(before, files(&first));
    }
    let tidy = fs::read_to_string(dir.path().join("a0/tidy_lp.csv")).unwrap();
    assert_eq!(tidy.lines().next().unwrap(), "n,r,p,factor,weight,ratio");
}
