use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fracgauss::momentsolve::{load_table, Table};
use fracgauss::ExponentialSum;
use serde_json::Value;

fn fracgauss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracgauss")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

fn header(text: &str) -> Vec<String> {
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn exact_case_solves_to_one_term() {
    let out = fracgauss(&["solve-frac", "--a", "0", "--sigma", "0.7071067811865476"]);
    assert_eq!(out.status.code(), Some(0));
    let sum: ExponentialSum = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(sum.len(), 1);
    assert!((sum.terms[0].alpha - 1.0).norm() < 1e-10);
    assert!((sum.terms[0].gamma - 1.0).norm() < 1e-10);
}

#[test]
fn solve_writes_sum_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let sum_path = dir.path().join("sum.json");
    let report_path = dir.path().join("report.json");
    let out = fracgauss(&[
        "solve-frac",
        "--moments",
        "64",
        "--tol",
        "1e-10",
        "--out",
        sum_path.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let sum: ExponentialSum = serde_json::from_str(&fs::read_to_string(&sum_path).unwrap()).unwrap();
    let report: Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["model_order"].as_u64().unwrap() as usize, sum.len());
    assert!((8..=14).contains(&sum.len()));
    assert!(report["max_abs_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &["solve-frac", "--a", "0.75"][..],
        &["solve-order", "--a", "0.5"][..],
        &["eval", "--table", "table1", "--grid", "-6", "6", "97", "--with-oracle"][..],
        &["error", "--dawson", "--table", "table2", "--scan-points", "2000"][..],
    ] {
        let first = fracgauss(args);
        let second = fracgauss(args);
        assert_eq!(first.status.code(), Some(0), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn sinc_solve_is_conjugate_closed() {
    let out = fracgauss(&["solve-sinc", "--moments", "48", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(0));
    let sum: ExponentialSum = serde_json::from_slice(&out.stdout).unwrap();
    for t in &sum.terms {
        let partner = sum
            .terms
            .iter()
            .map(|u| (u.gamma - t.gamma.conj()).norm() + (u.alpha - t.alpha.conj()).norm() / t.alpha.norm())
            .fold(f64::INFINITY, f64::min);
        assert!(partner < 1e-6, "term {t:?} has no conjugate partner");
    }
}

#[test]
fn table1_eval_at_origin_is_weight_sum() {
    let out = fracgauss(&["eval", "--table", "table1", "--grid", "-6", "6", "481"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(header(&text)[..3], ["axis", "re", "im"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 481);
    let middle = &rows[240];
    assert_eq!(middle[0], 0.0);
    let weight_sum: f64 = load_table(Table::Table1).alphas().map(|a| a.re).sum();
    assert!((middle[1] - weight_sum).abs() < 1e-14);
}

#[test]
fn spectrum_columns() {
    let out = fracgauss(&["eval", "--table", "table1", "--spectrum", "--grid", "0", "6", "241"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let head = header(&text);
    for name in ["abs", "abs_exact"] {
        assert!(head.iter().any(|h| h == name), "missing {name} in {head:?}");
    }
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 241);
    let abs_exact = head.iter().position(|h| h == "abs_exact").unwrap();
    // |f̂(ω)| = e^{−ω²/2}(ω/σ)^{1/2} vanishes at ω = 0
    assert_eq!(rows[0][abs_exact], 0.0);
}

#[test]
fn sweep_writes_eighteen_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracgauss(&[
        "eval",
        "--sweep-a",
        "0:0.125:2.125",
        "--grid",
        "-6",
        "6",
        "49",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 18);
    assert_eq!(names.first().unwrap(), "eval_a0.000.csv");
    assert_eq!(names.last().unwrap(), "eval_a2.125.csv");
    let rows = csv_rows(&fs::read_to_string(dir.path().join("eval_a1.000.csv")).unwrap());
    assert_eq!(rows.len(), 49);
}

#[test]
fn error_report_for_exact_case() {
    let out = fracgauss(&["error", "--a", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["l2_closed_form"].as_f64().unwrap() <= 1e-12);
    assert!(report["relative_gap"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn table1_l2_values_agree() {
    let out = fracgauss(&["error", "--table", "table1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["relative_gap"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn dawson_bounds_pass_for_table2() {
    let out = fracgauss(&["error", "--dawson", "--table", "table2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "pass");
}

#[test]
fn order_derivative_columns_and_gap() {
    let out = fracgauss(&["order-deriv", "--a", "0.5", "--delta-a", "1e-3", "--grid", "-6", "6", "121"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let head = header(&text);
    let col = |name: &str| head.iter().position(|h| h == name).unwrap();
    let (re, im, re_fd, im_fd) = (col("re"), col("im"), col("re_fd"), col("im_fd"));
    let gap = csv_rows(&text)
        .iter()
        .map(|r| (r[re] - r[re_fd]).hypot(r[im] - r[im_fd]))
        .fold(0.0, f64::max);
    assert!(gap <= 1e-3, "gap {gap}");
}

#[test]
fn order_derivative_at_zero_order_is_finite() {
    let out = fracgauss(&["order-deriv", "--a", "0", "--grid", "-6", "6", "61"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(csv_rows(&stdout(&out)).iter().flatten().all(|x| x.is_finite()));
}

#[test]
fn exit_codes() {
    assert_eq!(fracgauss(&["solve-frac", "--max-order", "2"]).status.code(), Some(2));
    assert_eq!(fracgauss(&["eval", "--sum", "/nonexistent/sum.json"]).status.code(), Some(4));
    assert_eq!(fracgauss(&["error", "--a", "-0.7"]).status.code(), Some(5));
    assert_eq!(fracgauss(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(fracgauss(&["eval", "--table", "table1", "--grid", "1", "0", "5"]).status.code(), Some(64));
}

#[test]
fn failed_write_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("sum.json");
    let out = fracgauss(&["solve-frac", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!Path::new(&target).exists());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing"), "{stderr}");
}

#[test]
fn sum_file_round_trips_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    let sum_path = dir.path().join("sum.json");
    let solve = fracgauss(&["solve-frac", "--a", "1.5", "--out", sum_path.to_str().unwrap()]);
    assert_eq!(solve.status.code(), Some(0));
    let out = fracgauss(&["eval", "--sum", sum_path.to_str().unwrap(), "--grid", "-6", "6", "25", "--with-oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let head = header(&text);
    let col = |name: &str| head.iter().position(|h| h == name).unwrap();
    let worst = csv_rows(&text)
        .iter()
        .map(|r| (r[col("re")] - r[col("re_exact")]).hypot(r[col("im")] - r[col("im_exact")]))
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "worst {worst}");
}
