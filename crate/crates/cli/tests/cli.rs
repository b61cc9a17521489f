use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn orlicz(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orlicz"));
    cmd.args(args).env_remove("ORLICZ_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("ORLICZ_OUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn scan_rows_match_closed_form() {
    let out = orlicz(&["extremal-scan", "power:p=2", "--n", "1,2"], None);
    assert!(out.status.success());
    let recs = lines(&out);
    let rows: Vec<(u64, f64)> = recs
        .iter()
        .filter(|r| r["op"] == "extremal-scan.row")
        .map(|r| {
            (
                r["outputs"]["n"].as_u64().unwrap(),
                r["outputs"]["fstar"].as_f64().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].0, 1);
    assert!((rows[0].1 - 1.0).abs() < 1e-12);
    assert_eq!(rows[1].0, 2);
    assert!((rows[1].1 - 1.08239).abs() < 1e-5);
}

#[test]
fn eighth_level_of_the_square() {
    let out = orlicz(&["conjugate", "power:p=2", "--n", "8"], None);
    assert!(out.status.success());
    let recs = lines(&out);
    let levels = recs[1]["outputs"]["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 8);
    assert!((levels[7].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn linear_partial_sums() {
    let out = orlicz(&["nonembed", "linear", "--J", "3"], None);
    assert!(out.status.success());
    let sums: Vec<f64> = lines(&out)[1]["outputs"]["partial_sums"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(sums, vec![1.0, 2.0, 3.0]);
}

#[test]
fn euclidean_norm_after_normalisation() {
    let out = orlicz(
        &["norm", "power:p=2", "--normalize", "--values", "3,-4"],
        None,
    );
    assert!(out.status.success());
    let norm = lines(&out)[1]["outputs"]["norm"].as_f64().unwrap();
    assert!((norm - 5.0).abs() < 1e-12);
}

#[test]
fn header_records_config_and_version() {
    let out = orlicz(
        &["embed-verify", "lt", "--samples", "5", "--seed", "9"],
        None,
    );
    assert!(out.status.success());
    let header = &lines(&out)[0];
    assert_eq!(header["tool"], "orlicz");
    assert_eq!(header["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(header["config"]["seed"], 9);
    assert_eq!(header["config"]["command"]["subcommand"], "embed-verify");
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        vec!["norm", "cubic", "--values", "1"],
        vec!["conjugate", "power:p=0.5"],
        vec!["derive", "--I", "9"],
        vec!["decompose", "lt", "--values", "1,2"],
        vec!["no-such-command"],
    ] {
        let out = orlicz(&args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = stderr_json(&out);
        assert_eq!(err["exit_code"], 2);
        assert!(err["error"].is_string() && err["message"].is_string());
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn residual_above_tolerance_exits_with_three() {
    let strict = orlicz(&["conjugate", "lt", "--n", "16", "--tol", "0"], None);
    assert_eq!(strict.status.code(), Some(3));
    let err = stderr_json(&strict);
    assert_eq!(err["error"], "residual");
    assert_eq!(err["exit_code"], 3);
    // the report is still written before the verdict
    assert_eq!(lines(&strict).len(), 3);

    let loose = orlicz(&["conjugate", "lt", "--n", "16", "--tol", "1e-12"], None);
    assert!(loose.status.success());
    let bad = orlicz(&["nonembed", "power:p=2", "--J", "5", "--tol", "-1"], None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn env_directory_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = orlicz(
        &[
            "extremal-scan",
            "lt",
            "--n",
            "1,2,4",
            "--csv",
            csv.to_str().unwrap(),
        ],
        Some(dir.path()),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report = std::fs::read_to_string(dir.path().join("extremal-scan.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 1 + 3 + 1);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("n,fstar,lambda,blocks,kkt_residual,error"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn csv_is_refused_where_there_is_no_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let out = orlicz(
        &[
            "norm",
            "lt",
            "--values",
            "1",
            "--csv",
            csv.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!csv.exists());
}

#[test]
fn capped_family_reports_finite_rank_of_the_origin() {
    let out = orlicz(&["derive", "--cap", "3", "--m", "1", "--m-max", "10"], None);
    assert!(out.status.success());
    let recs = lines(&out);
    let omega = recs.iter().find(|r| r["op"] == "derive.omega").unwrap();
    assert_eq!(omega["outputs"]["passed"], false);
    assert_eq!(omega["outputs"]["zero_rank"], 3);
    let full = orlicz(&["derive", "--m", "2"], None);
    assert!(full.status.success());
    let recs = lines(&full);
    let omega = recs.iter().find(|r| r["op"] == "derive.omega").unwrap();
    assert_eq!(omega["outputs"]["zero_rank"], "ω");
}

#[test]
fn truncated_k_check_in_embed_verify() {
    let out = orlicz(
        &[
            "embed-verify",
            "power:p=3",
            "--samples",
            "20",
            "--I",
            "5",
            "--N",
            "5",
        ],
        None,
    );
    assert!(out.status.success());
    let recs = lines(&out);
    let k = recs
        .iter()
        .find(|r| r["op"] == "embed-verify.truncated-k")
        .unwrap();
    assert_eq!(k["residuals"]["mismatches"].as_array().unwrap().len(), 0);
}
