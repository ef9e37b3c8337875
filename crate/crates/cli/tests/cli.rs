//! Exit codes, output formats and report schema of the `hw` binary.

mod common;

use common::{code, run, scratch, validate, write};
use serde_json::Value;

const SWAP_JSON: &str = r#"{"n": 2, "entries": [[0, 1], [1, 0]]}"#;

fn json(o: &std::process::Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn bound_reports_constants_and_values() {
    let dir = scratch("bound");
    let m = write(&dir, "offdiag2.json", SWAP_JSON);
    let o = run(&["bound", "--matrix", &m, "--sigma2", "1", "--t", "2", "--lambda", "0.1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["c1"], 2.0);
    assert_eq!(v["c2"], 1.0);
    assert_eq!(v["diagonal_free"], true);
    assert_eq!(v["frob2"], 2.0);
    assert_eq!(v["opnorm"], 1.0);
    assert!((v["lambda_max"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    // 2·exp(−min(4/16, 2/6)) and exp(2·0.01·2).
    assert!((v["tail_bound"].as_f64().unwrap() - 2.0 * (-0.25f64).exp()).abs() < 1e-12);
    assert!((v["mgf_bound"].as_f64().unwrap() - 0.04f64.exp()).abs() < 1e-12);

    let i2 = write(&dir, "i2.csv", "1,0\n0,1\n");
    let o = run(&["bound", "--matrix", &i2, "--sigma2", "1", "--t", "4"]);
    let v = json(&o);
    assert_eq!((v["c1"].as_f64(), v["c2"].as_f64()), (Some(20.0), Some(4.0)));
    assert!((v["tail_bound"].as_f64().unwrap() - 2.0 * (-0.1f64).exp()).abs() < 1e-12);
    assert!(v.get("mgf_bound").is_none());

    let zero = write(&dir, "zero.json", r#"{"n": 2, "entries": [[0, 0], [0, 0]]}"#);
    let v = json(&run(&["bound", "--matrix", &zero, "--sigma2", "1"]));
    assert!(v["lambda_max"].is_null());

    let o = run(&["--format", "csv", "bound", "--matrix", &m, "--sigma2", "1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("c1,c2,diagonal_free,frob2,opnorm,lambda_max,mgf_bound,tail_bound\n2,1,true,2,1,"));
}

#[test]
fn bound_input_errors_exit_2() {
    let dir = scratch("bound-err");
    let m = write(&dir, "m.json", SWAP_JSON);
    let missing = dir.join("nope.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["bound", "--matrix", missing.to_str().unwrap(), "--sigma2", "1"],
        vec!["bound", "--matrix", &m, "--sigma2", "0"],
        vec!["bound", "--matrix", &m, "--sigma2", "-1"],
        vec!["bound", "--matrix", &m, "--sigma2", "1", "--lambda", "0.34"],
        vec!["bound", "--matrix", &m, "--sigma2", "1", "--t", "-1"],
        vec!["bound", "--sigma2", "1"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(!err.trim().is_empty(), "{args:?}: no diagnosis");
    }
    let bad = write(&dir, "bad.json", r#"{"n": 3, "entries": [[1, 2], [3, 4]]}"#);
    let o = run(&["bound", "--matrix", &bad, "--sigma2", "1"]);
    assert_eq!(code(&o), 2);
    assert_eq!(String::from_utf8_lossy(&o.stderr).trim().lines().count(), 1);
}

#[test]
fn simulate_tail_and_mgf_outputs() {
    let dir = scratch("simulate");
    let m = write(&dir, "m.json", SWAP_JSON);
    let o = run(&["simulate", "--matrix", &m, "--dist", "gaussian:1", "--samples", "20000", "--t-grid", "0:6:1.5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["kind"], "tail");
    assert_eq!(v["samples"], 20000);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["estimate"], 1.0);
    assert!(rows.iter().all(|r| r["pass"] == true));

    let o = run(&[
        "--format", "csv", "simulate", "--matrix", &m, "--dist", "rademacher", "--samples", "5000",
        "--lambda-grid", "0:0.15:0.05",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_or_lambda,estimate,ci_low,ci_high,bound,pass"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 6 && r[5] == "true"));
    assert_eq!(rows[0][1], "1");
}

#[test]
fn simulate_is_reproducible_and_dumps_samples() {
    let dir = scratch("dump");
    let m = write(&dir, "m.csv", "1,0.5\n-0.5,2\n");
    let dump = dir.join("samples.txt");
    let args = |threads: &'static str| {
        vec![
            "--seed".to_owned(), "9".into(), "--threads".into(), threads.into(), "simulate".into(),
            "--matrix".into(), m.clone(), "--dist".into(), "uniform:1".into(), "--samples".into(),
            "70000".into(), "--t-grid".into(), "0.5:2:0.5".into(),
        ]
    };
    let a = common::hw().args(args("1")).output().unwrap();
    let b = common::hw().args(args("3")).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let mut with_dump = args("2");
    with_dump.extend(["--dump".to_owned(), dump.to_str().unwrap().to_owned()]);
    let c = common::hw().args(with_dump).output().unwrap();
    assert_eq!(code(&c), 0);
    assert_eq!(a.stdout, c.stdout);
    let text = std::fs::read_to_string(&dump).unwrap();
    let ys: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(ys.len(), 70000);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let v = json(&a);
    assert!((mean - v["mean"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn simulate_notices_and_errors() {
    let dir = scratch("notices");
    let zero = write(&dir, "z.json", r#"{"n": 3, "entries": [[0,0,0],[0,0,0],[0,0,0]]}"#);
    let o = run(&["simulate", "--matrix", &zero, "--dist", "gaussian:1", "--samples", "1000", "--t-grid", "0.1:0.3:0.1"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));

    let id = write(&dir, "i.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let o = run(&["simulate", "--matrix", &id, "--dist", "rademacher", "--samples", "1000", "--t-grid", "0.1:1:0.3"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exactly zero"));
    let v = json(&o);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["estimate"] == 0.0));

    // I₃ with σ² = 1: λ_max = 1/12, so λ = 0.05 lies past half the domain.
    let bad: Vec<Vec<&str>> = vec![
        vec!["simulate", "--matrix", &id, "--dist", "gaussian:1", "--samples", "100", "--lambda-grid", "0:0.05:0.05"],
        vec!["simulate", "--matrix", &id, "--dist", "laplace:1", "--samples", "100", "--t-grid", "1:2:1"],
        vec!["simulate", "--matrix", &id, "--dist", "gaussian:1", "--samples", "100"],
        vec!["simulate", "--matrix", &id, "--dist", "gaussian:1", "--t-grid", "2:1:1"],
        vec!["simulate", "--matrix", &id, "--dist", "gaussian:1", "--samples", "0", "--t-grid", "1:2:1"],
        vec!["simulate", "--matrix", &id, "--dist", "gaussian:1", "--t-grid", "1:2:1", "--confidence", "1.5"],
    ];
    for args in bad {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn verify_reports_conform_to_schema() {
    let schema = common::schema();
    for suite in ["scalar", "exact"] {
        let o = run(&["verify", "--suite", suite, "--seed", "3"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        validate(&schema, &v, "$").unwrap();
        let checks = v["checks"].as_array().unwrap();
        let passed = checks.iter().filter(|c| c["pass"] == true).count();
        assert_eq!(v["summary"]["total"].as_u64().unwrap() as usize, checks.len());
        assert_eq!(v["summary"]["passed"].as_u64().unwrap() as usize, passed);
        assert_eq!(v["summary"]["failed"], 0);
        assert!(checks.iter().all(|c| c["category"] == suite));
    }
    let o = run(&["verify", "--suite", "montecarlo", "--samples", "2000", "--comparison-samples", "2000"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    validate(&schema, &v, "$").unwrap();
    assert_eq!(v["samples"], 2000);

    // The validator itself rejects malformed reports.
    let mut broken = v.clone();
    broken["checks"][0]["category"] = "vibes".into();
    assert!(validate(&schema, &broken, "$").is_err());
    broken = v.clone();
    broken.as_object_mut().unwrap().remove("summary");
    assert!(validate(&schema, &broken, "$").is_err());
}

#[test]
fn verify_usage_errors_and_csv() {
    assert_eq!(code(&run(&["verify", "--suite", "everything"])), 2);
    assert_eq!(code(&run(&["verify", "--samples", "0"])), 2);
    assert_eq!(code(&run(&["--threads", "many", "verify", "--suite", "scalar"])), 2);
    let o = common::hw()
        .env("HW_THREADS", "2")
        .args(["--format", "csv", "verify", "--suite", "scalar"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("id,category,pass,margin,details\nscalar.log_inequality,scalar,true,"));
}

#[test]
fn report_renders_table_and_propagates_failures() {
    let dir = scratch("report");
    let out = dir.join("exact.json");
    let o = run(&["--out", out.to_str().unwrap(), "verify", "--suite", "exact"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let o = run(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("exact.chi2_mgf_dominance") && table.contains("PASS"));
    assert!(table.trim_end().ends_with("0 failed"));

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    v["checks"][0]["pass"] = false.into();
    v["summary"]["passed"] = (v["summary"]["passed"].as_u64().unwrap() - 1).into();
    v["summary"]["failed"] = 1.into();
    let failed = write(&dir, "failed.json", &v.to_string());
    let o = run(&["report", &failed]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));

    v["summary"]["failed"] = 7.into();
    let inconsistent = write(&dir, "inconsistent.json", &v.to_string());
    assert_eq!(code(&run(&["report", &inconsistent])), 2);
    let garbage = write(&dir, "garbage.json", "{");
    assert_eq!(code(&run(&["report", &garbage])), 2);
}
