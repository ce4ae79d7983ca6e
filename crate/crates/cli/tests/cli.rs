use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rbkvs(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbkvs"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_mtx(dir: &Path, name: &str, rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> PathBuf {
    let mut text = format!(
        "%%MatrixMarket matrix coordinate real general\n{rows} {cols} {}\n",
        entries.len()
    );
    for (i, j, v) in entries {
        text.push_str(&format!("{} {} {v}\n", i + 1, j + 1));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn identity(dir: &Path, n: usize) -> PathBuf {
    let e: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
    write_mtx(dir, &format!("I{n}.mtx"), n, n, &e)
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn planted_solve_on_identity_converges() {
    let dir = TempDir::new().unwrap();
    identity(dir.path(), 3);
    let out = rbkvs(&["solve", "I3.mtx", "--planted", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = json_stdout(&out);
    assert_eq!(rec["converged"], true);
    assert_eq!(rec["method"], "rbkvs");
}

#[test]
fn solve_with_rhs_file_writes_the_solution() {
    let dir = TempDir::new().unwrap();
    write_mtx(
        dir.path(),
        "a.mtx",
        3,
        2,
        &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, 1.0), (2, 1, 1.0)],
    );
    fs::write(dir.path().join("b.txt"), "1\n4\n3\n").unwrap();
    let out = rbkvs(
        &[
            "solve",
            "a.mtx",
            "b.txt",
            "--method",
            "rk",
            "--seed",
            "5",
            "--solution-out",
            "x.txt",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let x: Vec<f64> = fs::read_to_string(dir.path().join("x.txt"))
        .unwrap()
        .lines()
        .map(|l| l.trim().parse().unwrap())
        .collect();
    assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 2.0).abs() < 1e-5, "{x:?}");
}

#[test]
fn malformed_matrix_reports_the_line() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("bad.mtx"),
        "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 1 1\n2 x 1\n",
    )
    .unwrap();
    let out = rbkvs(&["solve", "bad.mtx", "--planted", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.mtx:4"), "{err}");
}

#[test]
fn unknown_flag_and_bad_parameters_are_input_errors() {
    let dir = TempDir::new().unwrap();
    identity(dir.path(), 3);
    assert_eq!(
        rbkvs(&["solve", "I3.mtx", "--bogus"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(rbkvs(&["solve", "I3.mtx"], dir.path()).status.code(), Some(1));
    let out = rbkvs(
        &["solve", "I3.mtx", "--planted", "--method", "mrbkvs", "--beta=-0.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta must be nonnegative"));
    assert_eq!(rbkvs(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn iteration_budget_exhaustion_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let e: Vec<_> = (0..20)
        .flat_map(|i| [(i, i % 5, 1.0), (i, (i * 3 + 1) % 5, 0.5 + i as f64)])
        .collect();
    write_mtx(dir.path(), "a.mtx", 20, 5, &e);
    let out = rbkvs(
        &["solve", "a.mtx", "--planted", "--seed", "2", "--max-iters", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_stdout(&out)["converged"], false);
}

#[test]
fn bench_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let run = |sub: &str| {
        let out = rbkvs(
            &[
                "bench",
                "--preset",
                "rate_ratio3",
                "--trials",
                "1",
                "--seed",
                "7",
                "--out-dir",
                sub,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (
            out.stdout,
            fs::read(dir.path().join(sub).join("rate_ratio3.csv")).unwrap(),
        )
    };
    let (a_out, a_file) = run("a");
    let (b_out, b_file) = run("b");
    assert_eq!(a_out, b_out);
    assert_eq!(a_file, b_file);
    assert_eq!(a_out, a_file);
    let text = String::from_utf8(a_file).unwrap();
    assert!(text.starts_with("method,trials,mean_iters,std_iters,mean_seconds,acc,ptt,preproc_seconds\n"));
    assert!(dir.path().join("a/rate_ratio3.json").exists());
}

#[test]
fn bench_from_config_file_and_config_errors() {
    let dir = TempDir::new().unwrap();
    let good = r#"{"name": "tiny", "instance": {"kind": "type2", "m": 40, "n": 8, "r": 8, "kappa": 3},
        "methods": [{"method": "rk"}, {"method": "gtrk"}, {"method": "rbk"}, {"method": "rbkvs"}], "trials": 2, "seed": 3}"#;
    fs::write(dir.path().join("tiny.json"), good).unwrap();
    let out = rbkvs(&["bench", "tiny.json", "--jobs", "2", "--timing"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("rk,2,"));

    let bad = r#"{"name": "dup", "instance": {"kind": "type2", "m": 40, "n": 8, "r": 8, "kappa": 3},
        "methods": [{"method": "rk"}, {"method": "rk"}], "trials": 0}"#;
    fs::write(dir.path().join("dup.json"), bad).unwrap();
    let out = rbkvs(&["bench", "dup.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.matches("config error:").count() >= 2, "{err}");

    assert_eq!(rbkvs(&["bench", "--preset", "nope"], dir.path()).status.code(), Some(1));
}

#[test]
fn bench_lists_presets() {
    let dir = TempDir::new().unwrap();
    let out = rbkvs(&["bench", "--list-presets"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout)
        .lines()
        .any(|l| l == "type1_full_rank"));
}

#[test]
fn sample_check_agrees_with_enumeration() {
    let dir = TempDir::new().unwrap();
    identity(dir.path(), 4);
    let out = rbkvs(&["sample-check", "I4.mtx", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json_stdout(&out);
    assert_eq!(r["pairs"], 6);
    assert_eq!(r["pass"], true);

    let mut e = vec![(0, 0, 1.0), (1, 0, 2.0), (2, 1, 1.0), (3, 2, 1.0)];
    e.push((3, 1, 0.5));
    write_mtx(dir.path(), "par.mtx", 4, 3, &e);
    let out = rbkvs(
        &["sample-check", "par.mtx", "--seed", "3", "--draws", "50000"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json_stdout(&out)["zero_mass_pairs_drawn"], 0);

    let mut e = Vec::new();
    for i in 0..8 {
        for j in 0..5 {
            e.push((i, j, ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.25 * (i as f64)));
        }
    }
    write_mtx(dir.path(), "r.mtx", 8, 5, &e);
    let out = rbkvs(&["sample-check", "r.mtx", "--seed", "9"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json_stdout(&out)["max_table_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn preprocess_warms_the_cache_for_solve() {
    let dir = TempDir::new().unwrap();
    identity(dir.path(), 5);
    let first = rbkvs(&["preprocess", "I5.mtx", "--cache-dir", "cache"], dir.path());
    assert_eq!(first.status.code(), Some(0));
    let r = json_stdout(&first);
    assert_eq!(r["cache_hit"], false);
    assert_eq!(r["flops"], r["predicted_flops"]);
    let second = rbkvs(&["preprocess", "I5.mtx", "--cache-dir", "cache"], dir.path());
    assert_eq!(json_stdout(&second)["cache_hit"], true);
    assert_eq!(json_stdout(&second)["key"], r["key"]);
    let solve = rbkvs(
        &["solve", "I5.mtx", "--planted", "--seed", "4", "--cache-dir", "cache"],
        dir.path(),
    );
    assert_eq!(solve.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&solve.stderr).contains("cache hit"));
}

#[test]
fn consensus_reaches_the_average() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.txt"), "1\n2\n3\n4\n5\n6\n").unwrap();
    for method in ["rk", "rbkvs"] {
        let out = rbkvs(
            &[
                "consensus",
                "--graph",
                "line",
                "--vertices",
                "6",
                "--values",
                "c.txt",
                "--method",
                method,
                "--seed",
                "2",
                "--tol",
                "1e-8",
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json_stdout(&out)["converged"], true);
    }
    let out = rbkvs(&["consensus", "--graph", "cycle", "--vertices", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rank_deficient_preset_runs_to_completion() {
    let dir = TempDir::new().unwrap();
    let out = rbkvs(
        &[
            "bench",
            "--preset",
            "type1_rank_deficient",
            "--trials",
            "1",
            "--seed",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value =
        serde_json::from_slice(&fs::read(dir.path().join("type1_rank_deficient.json")).unwrap()).unwrap();
    assert_eq!(report["complete"], true);
    let rbkvs_row = report["methods"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["label"] == "rbkvs")
        .unwrap();
    assert!(rbkvs_row["ptt"].as_f64().unwrap() > 0.0);
}
