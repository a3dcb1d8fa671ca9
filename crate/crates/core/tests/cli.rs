use std::path::Path;
use std::process::{Command, Output};

const NORM_2D: &str = r#"{"atom":"scaled_norm","ell":1,"center":[0,0]}"#;
const NORM_1D: &str = r#"{"atom":"scaled_norm","ell":1,"center":[0]}"#;
const HALF_SQ_1D: &str = r#"{"atom":"quadratic","Q":[[1]],"b":[0],"c":0}"#;

fn proxcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proxcalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn prox_prints_the_minimizer() {
    let o = proxcalc(&["prox", "--f", NORM_2D, "--x", "3,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "(2.4, 3.2)");
}

#[test]
fn prox_json_reports_method_and_envelope() {
    let o = proxcalc(&["--format", "json", "prox", "--f", NORM_2D, "--x", "3,4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["method"], "closed_form");
    assert!((v["envelope_value"].as_f64().unwrap() - 4.5).abs() < 1e-12);
    let m: Vec<f64> = serde_json::from_value(v["minimizer"].clone()).unwrap();
    assert!((m[0] - 2.4).abs() < 1e-12 && (m[1] - 3.2).abs() < 1e-12);
}

#[test]
fn numerical_prox_agrees_with_closed_form() {
    let o = proxcalc(&["--format", "json", "prox", "--f", NORM_2D, "--x", "3,4", "--numerical"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["method"], "numerical");
    let m: Vec<f64> = serde_json::from_value(v["minimizer"].clone()).unwrap();
    assert!((m[0] - 2.4).abs() < 1e-6 && (m[1] - 3.2).abs() < 1e-6);
}

#[test]
fn conjugate_evaluates_at_a_point() {
    let o = proxcalc(&["conjugate", "--f", HALF_SQ_1D, "--y", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn bad_spec_exits_with_usage_error() {
    let o = proxcalc(&["prox", "--f", r#"{"atom":"nope"}"#, "--x", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown kind"), "{}", stderr(&o));

    let o = proxcalc(&["prox", "--f", NORM_2D, "--x", "1,2,3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_all_reflexive_pair_passes() {
    let o = proxcalc(&["verify-all", "--f", NORM_2D, "--g", NORM_2D, "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(reports.len(), 9);
    assert!(reports.iter().all(|r| r["status"] != "counterexample"));
}

#[test]
fn verify_all_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = proxcalc(&[
            "--format",
            "csv",
            "--output",
            path.to_str().unwrap(),
            "verify-all",
            "--f",
            NORM_1D,
            "--g",
            HALF_SQ_1D,
            "--seed",
            "11",
        ]);
        assert!(o.status.code().is_some_and(|c| c != 1), "{}", stderr(&o));
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn compare_reports_failed_hypothesis() {
    let o = proxcalc(&["compare", "--f", NORM_1D, "--g", HALF_SQ_1D]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(reports[0]["status"], "hypothesis_fails");
    let w = reports[0]["witnesses"].as_array().unwrap();
    for (i, a) in w.iter().enumerate() {
        assert!(w[..i].iter().all(|b| b["point"] != a["point"]));
    }
}

fn write_soft_threshold_table(path: &Path) {
    let mut s = String::from("x1,p1\n");
    for i in 0..=60 {
        let x = -3.0 + 0.1 * i as f64;
        let p = x.signum() * (x.abs() - 1.0).max(0.0);
        s.push_str(&format!("{x},{p}\n"));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn reconstruct_recovers_the_norm_from_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("oracle.csv");
    let queries = dir.path().join("queries.csv");
    write_soft_threshold_table(&table);
    std::fs::write(&queries, "0.5\n-0.75\n0\n").unwrap();
    let o = proxcalc(&[
        "reconstruct",
        "--oracle-table",
        table.to_str().unwrap(),
        "--anchor",
        "0",
        "--f-at-anchor",
        "0",
        "--grid=-3:3:61",
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut rows = out.lines();
    assert_eq!(rows.next(), Some("x1,value,boundary"));
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let (x, v): (f64, f64) = (cols[0].parse().unwrap(), cols[1].parse().unwrap());
        assert!((v - x.abs()).abs() < 2e-3, "{row}");
        assert_eq!(cols[2], "false");
    }
}
