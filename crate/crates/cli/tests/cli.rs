use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use vlab_core::matcore::csv::from_csv;
use vlab_core::matcore::BasisTag;
use vlab_core::su11::{generators, Sector};

fn vlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn algebra_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = vlab(&["verify", "--suite", "algebra", "--k", "1", "--dim", "64", "--report", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json_report(&path);
    assert_eq!(r["version"], 1);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn k_and_g_together_is_a_usage_error() {
    let o = vlab(&["verify", "--suite", "algebra", "--k", "1", "--g", "2", "--dim", "16"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn missing_sector_is_a_config_error() {
    assert_eq!(code(&vlab(&["verify", "--suite", "algebra", "--dim", "16"])), 2);
    assert_eq!(code(&vlab(&["verify", "--suite", "algebra", "--k", "1"])), 2);
    assert_eq!(code(&vlab(&["verify", "--k", "1", "--dim", "16"])), 2);
}

#[test]
fn omega_outside_domain_rejected() {
    let o = vlab(&["verify", "--suite", "timeops", "--k", "1.25", "--dim", "64", "--omega", "1.0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("omega"));
}

#[test]
fn window_too_large_rejected() {
    let o = vlab(&["verify", "--suite", "timeops", "--k", "1.25", "--dim", "32", "--window", "16"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn failing_check_exits_one_and_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = vlab(&[
        "verify",
        "--suite",
        "algebra",
        "--k",
        "1",
        "--dim",
        "64",
        "--tol",
        "su11_lowering_raising=0",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let r = json_report(&path);
    let c = r["checks"].as_array().unwrap().iter().find(|c| c["id"] == "su11_lowering_raising").unwrap();
    assert_eq!(c["status"], "fail");
    assert_eq!(c["tolerance"], 0.0);
}

#[test]
fn tolerance_override_on_report_only_check_rejected() {
    let o = vlab(&["verify", "--suite", "conformal", "--k", "1", "--dim", "64", "--tol", "energy_eigenvector=1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_schema_and_tiers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    vlab(&["verify", "--suite", "conformal", "--g", "2", "--dim", "64", "--report", path.to_str().unwrap()]);
    let r = json_report(&path);
    assert_eq!(r["params"]["sector"]["g"], 2.0);
    assert_eq!(r["params"]["dim"], 64);
    for c in r["checks"].as_array().unwrap() {
        for key in ["id", "paper_eq", "tier", "residual", "tolerance", "status"] {
            assert!(c.get(key).is_some(), "{key} missing in {c}");
        }
        assert!(!c["paper_eq"].as_str().unwrap().is_empty());
        assert_eq!(c["tier"] == "report_only", c["status"] == "report", "{c}");
        assert_eq!(c["tier"] == "report_only", c["tolerance"].is_null(), "{c}");
    }
    let tables = r["tables"].as_array().unwrap();
    assert!(tables.iter().any(|t| t["id"] == "energy_eigenvector" && t["rows"].as_array().unwrap().len() == 3));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        vlab(&["verify", "--suite", "timeops", "--k", "1.25", "--dim", "48", "--report", p.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn csv_report_format() {
    let o = vlab(&["verify", "--suite", "algebra", "--k", "1", "--dim", "16", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "id,tier,residual,tolerance,status,error,paper_eq");
    assert_eq!(lines.count(), 8);
}

#[test]
fn sweep_needs_two_monotone_values() {
    let base = ["sweep", "--suite", "timeops", "--k", "1.25", "--dim", "64"];
    let single: Vec<&str> = base.iter().copied().chain(["--axis", "omega", "--values", "0.4"]).collect();
    assert_eq!(code(&vlab(&single)), 2);
    let zigzag: Vec<&str> = base.iter().copied().chain(["--axis", "omega", "--values", "0.4,0.1,0.2"]).collect();
    assert_eq!(code(&vlab(&zigzag)), 2);
}

fn trend_rows<'a>(text: &'a str, id: &str) -> Vec<Vec<&'a str>> {
    text.lines().skip(1).map(|l| l.split(',').collect::<Vec<_>>()).filter(|f| f[1] == id).collect()
}

#[test]
fn dimension_sweep_of_sandwich_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let o = vlab(&[
        "sweep",
        "--axis",
        "dim",
        "--values",
        "32,64,128,256",
        "--suite",
        "timeops",
        "--k",
        "1.25",
        "--report",
        path.to_str().unwrap(),
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("value,check_id,residual,order\n"));
    let rows = trend_rows(&text, "t_minimal_sandwich");
    assert_eq!(rows.len(), 4);
    let r: Vec<f64> = rows.iter().map(|f| f[2].parse().unwrap()).collect();
    assert!(r.windows(2).all(|p| p[1] < p[0]), "{r:?}");
    assert!(rows[0][3].is_empty() && !rows[1][3].is_empty());
    let reports: Value = json_report(&path);
    assert_eq!(reports.as_array().unwrap().len(), 4);
}

#[test]
fn omega_sweep_reports_orders() {
    let o = vlab(&[
        "sweep",
        "--axis",
        "omega",
        "--values",
        "0.4,0.2,0.1",
        "--suite",
        "timeops",
        "--k",
        "1.25",
        "--dim",
        "64",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = trend_rows(&text, "small_omega_hermitian");
    assert_eq!(rows.len(), 3);
    assert!(rows[1][3].parse::<f64>().unwrap().is_finite());
}

#[test]
fn export_generator_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k3.csv");
    let o = vlab(&["export", "--operator", "K3", "--out", path.to_str().unwrap(), "--k", "1", "--dim", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    assert_eq!(lines[0], "0,0,1.0000000000000000e0,0.0000000000000000e0");
    assert_eq!(lines[5], "1,1,2.0000000000000000e0,0.0000000000000000e0");
}

#[test]
fn export_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kplus.csv");
    vlab(&["export", "--operator", "Kplus", "--out", path.to_str().unwrap(), "--k", "1.25", "--dim", "24"]);
    let back = from_csv(&std::fs::read_to_string(&path).unwrap(), BasisTag::sector(1.25, 24)).unwrap();
    assert_eq!(back, generators(&Sector::from_k(1.25, 24).unwrap()).kplus);
}

#[test]
fn export_guards() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let out = out.to_str().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["export", "--out", out];
        args.extend_from_slice(extra);
        code(&vlab(&args))
    };
    assert_eq!(run(&["--operator", "T_omega", "--k", "1.25", "--dim", "16"]), 2);
    assert_eq!(run(&["--operator", "T_omega", "--k", "1.25", "--dim", "16", "--omega", "0.5"]), 0);
    assert_eq!(run(&["--operator", "Q", "--k", "1.25", "--dim", "16"]), 2);
    assert_eq!(run(&["--operator", "Q", "--k", "0.75", "--dim", "16"]), 0);
    assert_eq!(run(&["--operator", "x", "--k", "0.75", "--dim", "15"]), 2);
    assert_eq!(run(&["--operator", "p", "--k", "0.75", "--dim", "16"]), 0);
    assert_eq!(run(&["--operator", "Bogus", "--k", "0.75", "--dim", "16"]), 2);
    assert_eq!(run(&["--operator", "T_CS", "--k", "1.25", "--dim", "32", "--omega", "0.5"]), 0);
    assert_eq!(run(&["--operator", "U1", "--k", "1.25", "--dim", "16"]), 0);
}

#[test]
fn every_operator_exports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    for op in ["K3", "Kplus", "Kminus", "H", "D", "K", "T_min", "T_omega", "Q", "T_h", "T_CS", "S", "U", "U1", "x", "p"]
    {
        let a = dir.path().join(format!("{op}-a.csv"));
        let b = dir.path().join(format!("{op}-b.csv"));
        for p in [&a, &b] {
            let o = vlab(&[
                "export",
                "--operator",
                op,
                "--out",
                p.to_str().unwrap(),
                "--k",
                "0.75",
                "--dim",
                "16",
                "--omega",
                "0.5",
                "--window",
                "4",
            ]);
            assert_eq!(code(&o), 0, "{op}: {}", stderr(&o));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{op}");
    }
}
