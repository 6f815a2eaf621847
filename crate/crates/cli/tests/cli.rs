use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use renorm_cli::table::Table;

fn renorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renorm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("run.json");
    fs::write(
        &path,
        r#"{
  "s_grid": {"min": -1.0, "max": 1.0, "count": 5},
  "n_grid": {"min": 10.0, "max": 100.0, "count": 2, "spacing": "log"},
  "cutoff_grid": {"min": 1000.0, "max": 10000.0, "count": 2, "spacing": "log"},
  "theta_grid": {"min": -1.0, "max": 1.0, "count": 3}
}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn spectrum_reports_class_membership() {
    let o = renorm(&["spectrum"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# spectrum\n"));
    assert!(text.contains("\nB1,no\n"));
    assert!(text.contains("\nB2,yes\n"));
    assert!(text.contains("\nb1,inf\n"));
}

#[test]
fn csv_and_json_files_round_trip_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    for (format, ext) in [("csv", "csv"), ("json", "json")] {
        let out = tmp.path().join(format);
        let o = renorm(&["phi", "--config", &cfg, "--format", format, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(out.join(format!("phi.{ext}"))).unwrap();
        let table = match format {
            "csv" => Table::from_csv("phi", &text).unwrap(),
            _ => Table::from_json("phi", &text).unwrap(),
        };
        // 2 raw n values, 2 cutoffs, 1 renormalized series, 5 s values each.
        assert_eq!(table.rows.len(), 25);
        let again = if format == "csv" { table.to_csv() } else { table.to_json() };
        assert_eq!(again, text);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let a = renorm(&["z", "--config", &cfg, "--seed", "7"]);
    let b = renorm(&["z", "--config", &cfg, "--seed", "7", "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    for name in ["# z_decay", "# z_flow", "# z_profile"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn malformed_config_is_a_configuration_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, r#"{"lambda": -1.0}"#).unwrap();
    assert_eq!(renorm(&["spectrum", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&path, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(renorm(&["phi", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&path, "{ not json").unwrap();
    assert_eq!(renorm(&["z", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_lists_all_criteria() {
    let o = renorm(&["verify", "--list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 12);
    assert!(text.contains("kappa-recovery"));
}

#[test]
fn corrupted_golden_names_the_criterion() {
    let tmp = tempfile::tempdir().unwrap();
    let golden = tmp.path().join("golden.json");
    fs::write(&golden, r#"{"euler_gamma": 0.6}"#).unwrap();
    let out = tmp.path().join("report");
    let o = renorm(&["verify", "--golden", golden.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("kappa-recovery"), "{stderr}");
    let report = fs::read_to_string(out.join("verify_report.txt")).unwrap();
    assert!(report.lines().any(|l| l.contains("kappa-recovery") && l.contains("FAIL")));
}

#[test]
fn diagrams_emit_low_order_moments() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    let o = renorm(&["diagrams", "--order", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let moments: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("moments.json")).unwrap()).unwrap();
    let expected = ["1/2*b1", "1/2*b2 + 1/4*b1^2", "b3 + 3/4*b1*b2 + 1/8*b1^3"];
    for (k, want) in (1..=3).zip(expected) {
        let entry = &moments[k];
        assert_eq!(entry["k"], k);
        let p = renorm_core::MomentPolynomial::from_json_value(&entry["H"]).unwrap();
        assert_eq!(p.to_string(), want);
    }
    let identity = fs::read_to_string(out.join("identity.csv")).unwrap();
    assert_eq!(identity.lines().filter(|l| l.ends_with(",yes")).count(), 4);
    assert!(renorm(&["diagrams", "--order", "21"]).status.code() == Some(2));
}
