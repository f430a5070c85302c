use std::path::Path;
use std::process::{Command, Output};

use gsat_lab::dimacs::parse_dimacs;

fn gsat_lab(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsat-lab"))
        .args(args)
        .env("GSAT_LAB_OUT", root)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_prints_dimacs() {
    let root = tempfile::tempdir().unwrap();
    let out = stdout(&gsat_lab(root.path(), &["gen", "--n", "20", "--ratio", "4.3", "--seed", "3"]));
    let f = parse_dimacs(&out).unwrap();
    assert_eq!((f.num_vars(), f.num_clauses(), f.k()), (20, 86, 3));
    let again = stdout(&gsat_lab(root.path(), &["gen", "--n", "20", "--ratio", "4.3", "--seed", "3"]));
    assert_eq!(out, again);
}

#[test]
fn run_analyze_and_report_use_the_env_root() {
    let root = tempfile::tempdir().unwrap();
    let run = &["run", "--n", "60", "--problems", "4", "--tries", "5", "--seed", "8", "--workers", "2"];
    stdout(&gsat_lab(root.path(), run));
    let dir = root.path().join("n60_r4.3_k3");
    assert!(dir.join("manifest.json").is_file());
    assert!(dir.join("traces/problem_00003.trace").is_file());

    stdout(&gsat_lab(root.path(), &["analyze", "--n", "60"]));
    let curves = std::fs::read_to_string(dir.join("reports/curves.csv")).unwrap();
    assert!(curves.starts_with("x,x_over_N,mean_score_frac,mean_poss_frac,mean_delta,active_tries\n"));
    assert_eq!(curves.lines().count(), 1 + 151);

    let text = stdout(&gsat_lab(root.path(), &["report", "figure1", "--n", "60"]));
    assert!(text.contains("n60_r4.3_k3"), "{text}");
    let fig = std::fs::read_to_string(root.path().join("reports/figure1.csv")).unwrap();
    assert!(fig.starts_with("x,score_pct,poss_pct,delta\n0,"));
}

#[test]
fn report_names_missing_campaigns() {
    let root = tempfile::tempdir().unwrap();
    let o = gsat_lab(root.path(), &["report", "table2"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("n500_r4.3_k3") && err.contains("n500_r6_k3"), "{err}");
}

#[test]
fn invalid_configs_fail_cleanly() {
    let root = tempfile::tempdir().unwrap();
    let o = gsat_lab(root.path(), &["run", "--n", "10", "--tries", "0"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("tries per problem"));
}
