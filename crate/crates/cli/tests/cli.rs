use std::path::Path;
use std::process::Command;

use helixflow::io::{read_report, write_report, RunConfig, CSV_HEADER};
use helixflow::HelixConfig;
use helixflow_cli::{run_cli, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["helixflow"];
    full.extend_from_slice(args);
    let code = run_cli(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn series_exact_table() {
    let (code, out, _) = run(&["series", "--k", "1", "--order", "4", "--exact"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().skip(2).collect();
    assert_eq!(
        rows,
        [
            "0\t0\t1",
            "1\t1\t2",
            "2\t4/3\t1/6",
            "3\t-107/144\t-143/72",
            "4\t-215/216\t-4727/1728"
        ]
    );
}

#[test]
fn series_floating_point_matches_exact() {
    let (code, out, _) = run(&["series", "--k", "0.5", "--order", "6"]);
    assert_eq!(code, EXIT_OK);
    let (_, exact, _) = run(&["series", "--k", "1/2", "--order", "6", "--exact"]);
    for (a, b) in out.lines().skip(2).zip(exact.lines().skip(2)) {
        let fa: Vec<&str> = a.split('\t').collect();
        let fb: Vec<&str> = b.split('\t').collect();
        for j in 1..3 {
            let x: f64 = fa[j].parse().unwrap();
            let r = helixflow::series::parse_rational(fb[j]).unwrap();
            let y = helixflow::series::Coefficient::to_f64(&r);
            assert!((x - y).abs() <= 1e-13 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn verify_identities_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let (code, out, _) = run(&[
        "verify",
        "--k",
        "1",
        "--suite",
        "identities",
        "--tol",
        "1e-10",
        "--report",
        path_str(&report),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let doc = read_report(&report).unwrap();
    assert!(doc.overall_passed);
    assert_eq!(doc.suites.len(), 1);
    assert_eq!(doc.suites[0].suite, "identities");
    assert_eq!(doc.config.tol, 1e-10);
    assert_eq!(doc.config.suite.as_deref(), Some("identities"));
}

#[test]
fn cutoff_vtk_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.vtk");
    let (code, _, err) = run(&[
        "field",
        "--k",
        "1",
        "--variant",
        "cutoff",
        "--eps",
        "1e-3",
        "--grid",
        "32,32,32",
        "--format",
        "vtk",
        "--output",
        path_str(&path),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# vtk DataFile Version 3.0"));
    assert!(text.contains("DATASET STRUCTURED_GRID\nDIMENSIONS 32 32 32\nPOINTS 32768 double\n"));
    assert!(text.contains("POINT_DATA 32768\nVECTORS velocity double\n"));
    let values: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with(|c: char| c == '-' || c.is_ascii_digit()))
        .flat_map(|l| l.split_whitespace().map(|v| v.parse::<f64>().unwrap()))
        .collect();
    assert!(values.iter().all(|v| v.is_finite()));
}

#[test]
fn csv_line_count_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let (code, _, _) = run(&["field", "--grid", "2,2,2", "--output", path_str(&path)]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], CSV_HEADER);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("f{i}.json"));
        let (code, _, _) = run(&[
            "field",
            "--variant",
            "beltrami",
            "--branch=-",
            "--grid",
            "4,5,4",
            "--format",
            "json",
            "--output",
            path_str(&path),
        ]);
        assert_eq!(code, EXIT_OK);
        files.push(std::fs::read(&path).unwrap());
        let report = dir.path().join(format!("r{i}.json"));
        let (code, _, _) = run(&[
            "verify",
            "--suite",
            "reduced",
            "--seed",
            "7",
            "--report",
            path_str(&report),
        ]);
        assert_eq!(code, EXIT_OK);
        files.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(files[0], files[2]);
    assert_eq!(files[1], files[3]);
}

#[test]
fn empty_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let cfg = RunConfig::new("verify", &HelixConfig::default(), 1);
    write_report(&path, &cfg, &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["overall_passed"], serde_json::Value::Bool(true));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["series", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(run(&["verify", "--suite", "nonsense"]).0, EXIT_USAGE);
    assert_eq!(run(&["series", "--k", "-1"]).0, EXIT_USAGE);
    assert_eq!(
        run(&["field", "--grid", "1,2,2", "--output", "/dev/null"]).0,
        EXIT_USAGE
    );
    assert_eq!(run(&["--help"]).0, EXIT_OK);
}

#[test]
fn numeric_errors_exit_three() {
    // the + branch at k = 1 stops well short of t = 0.2
    let (code, out, err) = run(&["profile", "--k", "1", "--t-max", "0.2"]);
    assert_eq!(code, EXIT_NUMERIC);
    assert!(err.contains("outside"), "{err}");
    // the reachable part of the table and the stop reason are still printed
    assert!(out.starts_with("# k = 1, branch +, t_cap = "), "{out}");
    assert!(out.lines().count() > 10);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("far.csv");
    let (code, _, _) = run(&[
        "field",
        "--grid",
        "3,3,3",
        "--extent",
        "0.5,1.5,0,1,-1,1",
        "--output",
        path_str(&path),
    ]);
    assert_eq!(code, EXIT_NUMERIC);
}

#[test]
fn profile_output_starts_on_the_series() {
    let (code, out, _) = run(&[
        "profile",
        "--k",
        "1",
        "--branch",
        "-",
        "--t-max",
        "0.1",
        "--samples",
        "5",
    ]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert!((rows[4][0] - 0.1).abs() < 1e-15);
    let series = helixflow::expand_profile_series(1.0, 12).unwrap();
    let v = series.eval(-rows[0][0].sqrt());
    assert!((rows[0][1] - v.h).abs() < 1e-14);
    assert!((rows[0][2] - v.c).abs() < 1e-14);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_helixflow");
    let status = Command::new(exe)
        .arg("--definitely-not-a-flag")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    assert!(!status.stderr.is_empty());
    let ok = Command::new(exe)
        .args(["series", "--k", "2", "--order", "2", "--exact"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("2\t16/15\t31/15"));
}
