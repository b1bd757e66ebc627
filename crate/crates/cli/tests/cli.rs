use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diracsc"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_config(cmd: &str, name: &str, extra: &[&str]) -> Output {
    let path = config(name);
    let mut args = vec![cmd, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn footer(csv: &str, key: &str) -> f64 {
    let line = csv
        .lines()
        .find(|l| l.starts_with(&format!("# {key},")))
        .unwrap_or_else(|| panic!("no footer {key}"));
    line.split(',').nth(1).unwrap().parse().unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn selfcheck_passes_by_default() {
    let o = run(&["selfcheck"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["failed"], 0);
}

#[test]
fn selfcheck_reports_at_least_twenty_named_checks() {
    let o = run(&["selfcheck", "--dim", "2"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 20);
    assert!(checks.iter().all(|c| c["name"].as_str().is_some_and(|n| !n.is_empty())));
}

#[test]
fn injected_clifford_fault_names_the_anticommutator() {
    let o = run(&["selfcheck", "--dim", "1", "--inject-fault", "clifford"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("clifford_anticommutator"), "{}", stderr(&o));
}

#[test]
fn selfcheck_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["selfcheck", "--dim", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["dimensions"], serde_json::json!([1]));
}

#[test]
fn geodesic_constant_potential_closed_forms() {
    let o = run_config("geodesic", "constant_d2.json", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["tau"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    assert!((v["dA"].as_f64().unwrap() - 0.8).abs() < 1e-9);
    assert!((v["det_exp_prime"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(v["conjugate"], false);
    assert_eq!(v["uniqueness"]["unique"], true);
}

#[test]
fn geodesic_tanh_distance_matches_quadrature() {
    let o = run_config("geodesic", "tanh_d1.json", &[]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let a = v["dA"].as_f64().unwrap();
    let q = v["dA_quadrature"].as_f64().unwrap();
    assert!((a - q).abs() <= 1e-8, "{a} vs {q}");
}

#[test]
fn conjugate_endpoints_exit_three() {
    let o = run_config("geodesic", "conjugate_d2.json", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("near-conjugate"), "{}", stderr(&o));
}

#[test]
fn missing_field_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dimension": 1, "potential": {"kind": "constant", "params": {"value": -0.6}, "delta": 0.4},
            "x_star": [1.0]}"#,
    )
    .unwrap();
    let o = run(&["kernel", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("y_star"), "{}", stderr(&o));
}

#[test]
fn invalid_h_list_flag_is_a_config_error() {
    let o = run_config("kernel", "constant_d1.json", &["--h-list", "0.1,2.0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_output_is_byte_identical_across_runs() {
    let a = run_config("kernel", "constant_d3.json", &[]);
    let b = run_config("kernel", "constant_d3.json", &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn kernel_rows_are_sorted_by_decreasing_h() {
    let o = run_config("kernel", "constant_d2.json", &["--h-list", "0.05,0.2,0.1"]);
    assert_eq!(column(&stdout(&o), "h"), vec![0.2, 0.1, 0.05]);
}

#[test]
fn one_dimensional_constant_ratio_is_one() {
    let o = run_config("kernel", "constant_d1.json", &[]);
    for r in column(&stdout(&o), "ratio") {
        assert!((r - 1.0).abs() <= 1e-9, "{r}");
    }
}

#[test]
fn three_dimensional_constant_slope_footer() {
    let o = run_config("kernel", "constant_d3.json", &[]);
    let s = footer(&stdout(&o), "slope");
    assert!((0.8..=1.2).contains(&s), "{s}");
}

#[test]
fn kernel_writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let o = run_config("kernel", "constant_d2.json", &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(out).unwrap().starts_with("h,re_00"));
}

#[test]
fn positive_constant_kernel_matches_closed_form() {
    let o = run_config("kernel", "constant_positive_d1.json", &[]);
    for r in column(&stdout(&o), "ratio") {
        assert!((r - 1.0).abs() <= 1e-9, "{r}");
    }
}

#[test]
fn constant_command_reports_exact_entries() {
    let o = run_config("constant", "constant_d2.json", &[]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let err = column(&csv, "abs_ratio_minus_1");
    assert!(err.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn constant_command_rejects_variable_potential() {
    let o = run_config("constant", "bump_d1.json", &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate1d_bump_well_converges() {
    let o = run_config("validate1d", "bump_d1.json", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(footer(&csv, "slope") >= 0.8);
    assert!(footer(&csv, "adjoint_residual") <= 1e-8);
}

#[test]
fn validate1d_constant_control_is_exact() {
    let o = run_config("validate1d", "constant_d1.json", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn validate1d_needs_one_dimension() {
    let o = run_config("validate1d", "constant_d2.json", &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bmt_reports_equivalence() {
    let o = run_config("bmt", "bump_d3_bmt.json", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("t,s1,s2,s3,|s|,bmt2_residual\n"));
    assert!(csv.contains("# equivalence_pass,true"));
    for n in column(&csv, "|s|") {
        assert!((n - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn bmt_constant_potential_is_stationary() {
    let o = run_config("bmt", "constant_d3.json", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    for (k, col) in ["s1", "s2", "s3"].iter().enumerate() {
        let first = column(&csv, col)[0];
        for v in column(&csv, col) {
            assert!((v - first).abs() <= 1e-10, "component {k}");
        }
    }
}
