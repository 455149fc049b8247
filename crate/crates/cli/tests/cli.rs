use std::process::{Command, Output};

use bach3_core::catalog::{verify_solution, ResidualReport, SolutionSpec, VerifyOptions};
use serde_json::Value;

fn bach3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bach3"))
        .args(args)
        .env_remove("BACH3_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(text: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn verify_nariai_json_round_trips() {
    let out = bach3(&["verify", "nariai", "--lambda", "1", "--phi2", "0.75", "--grid", "5x3x3", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["schema"], "bach3-report/1");
    assert_eq!(doc["provenance"]["grid"], serde_json::json!([5, 3, 3]));
    assert_eq!(doc["provenance"]["diff"]["strategy"], "automatic");
    assert!(doc["report"]["summary"]["cotton_max"].as_f64().unwrap() <= 1e-7);

    let parsed: ResidualReport = serde_json::from_value(doc["report"].clone()).unwrap();
    let direct = verify_solution(
        &SolutionSpec::nariai(1.0, 0.75),
        &VerifyOptions {
            grid: Some([5, 3, 3]),
            ..VerifyOptions::default()
        },
    )
    .unwrap();
    assert_eq!(parsed, direct);
}

#[test]
fn verify_rejects_nariai_outside_its_window() {
    let out = bach3(&["verify", "nariai", "--lambda", "1", "--phi2", "0.4"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("1/(2Λ) < φ²"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_rnds_csv_has_seven_rows_at_full_precision() {
    let out = bach3(&["verify", "rnds", "--m", "1", "--q", "0.5", "--lambda", "0.02", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header[..4], ["x1", "x2", "x3", "hessian"]);
    assert_eq!(header.len(), 19);
    assert_eq!(rows.len(), 7);
    let direct = verify_solution(&SolutionSpec::rnds(1.0, 0.5, 0.02), &VerifyOptions::default()).unwrap();
    for (row, expected) in rows.iter().zip(&direct.rows) {
        assert_eq!(row[0].parse::<f64>().unwrap(), expected.point[0]);
        assert_eq!(row[15].parse::<f64>().unwrap(), expected.fc_minus_v);
        assert_eq!(row[16].parse::<f64>().unwrap(), expected.q.unwrap());
        assert!(row[14].is_empty());
    }
    assert!(stderr(&out).starts_with("PASS rnds"));
}

#[test]
fn csv_can_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cold.csv");
    let out = bach3(&[
        "verify",
        "cold",
        "--lambda",
        "1",
        "--phi2",
        "0.4",
        "--grid",
        "2x2x2",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let (_, rows) = csv_rows(&std::fs::read(&path).unwrap());
    assert_eq!(rows.len(), 8);
}

#[test]
fn spec_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nariai.kv");
    std::fs::write(&path, SolutionSpec::nariai(1.0, 0.9).to_kv()).unwrap();
    let file = path.to_str().unwrap();
    let out = bach3(&["verify", "--spec", file, "--grid", "2x1x1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["report"]["solution"]["phi2"], 0.9);
    let out = bach3(&["verify", "--spec", file, "--phi2", "0.6", "--grid", "2x1x1"]);
    assert_eq!(stdout_json(&out)["report"]["solution"]["phi2"], 0.6);
}

#[test]
fn tolerance_failures_exit_one() {
    let out = bach3(&["verify", "ultracold", "--lambda", "0.25", "--grid", "3x1x1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).starts_with("FAIL"));
    assert_eq!(stdout_json(&out)["report"]["verdict"]["pass"], false);

    let out = bach3(&["verify", "nariai", "--lambda", "1", "--phi2", "0.75", "--tolerance", "fc_minus_v=1e-30"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify"],
        vec!["verify", "kerr", "--lambda", "1"],
        vec!["verify", "nariai", "--lambda", "1", "--phi2", "0.75", "--grid", "5x3"],
        vec!["verify", "nariai", "--lambda", "1", "--phi2", "0.75", "--depth", "3"],
        vec!["verify", "nariai", "--lambda", "1", "--phi2", "0.75", "--tolerance", "medium"],
        vec!["verify", "nariai", "--lambda", "1", "--phi2", "0.75", "--diff", "fd", "--depth", "2"],
        vec!["roots", "--m", "-1", "--q", "0.5", "--lambda", "0"],
        vec!["frobnicate"],
    ] {
        let out = bach3(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
    assert_eq!(code(&bach3(&["--help"])), 0);
}

#[test]
fn finite_differences_default_to_the_loose_profile() {
    let out = bach3(&["verify", "nariai", "--lambda", "1", "--phi2", "0.75", "--diff", "fd"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["report"]["tolerance"]["name"], "loose-fd");
    assert_eq!(doc["provenance"]["diff"]["strategy"], "finite-difference");
}

#[test]
fn roots_match_the_closed_form() {
    let out = bach3(&["roots", "--m", "1", "--q", "0.6", "--lambda", "0", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let (_, rows) = csv_rows(&out.stdout);
    let r: Vec<f64> = rows.iter().map(|row| row[0].parse().unwrap()).collect();
    assert!((r[0] - 0.2).abs() < 1e-12 && (r[1] - 1.8).abs() < 1e-12);

    let out = bach3(&["roots", "--m", "1", "--q", "1.5", "--lambda", "0"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["roots"], serde_json::json!([]));
}

#[test]
fn ultracold_q_scan_changes_sign_at_two() {
    let out = bach3(&[
        "scan", "ultracold", "--lambda", "0.25", "--parameter", "r", "--lo", "0.5", "--hi", "4", "--steps", "15",
        "--observable", "q_value", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 16);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    let flip = pts.windows(2).find(|w| w[0].1 > 0.0 && w[1].1 < 0.0).unwrap();
    assert!(flip[0].0 < 2.0 && 2.0 < flip[1].0);
    for (r, q) in &pts {
        assert!((q - 2.0 * (1.0 - 0.25 * r * r)).abs() < 1e-12);
    }
}

#[test]
fn nariai_charge_scan_is_smallest_at_the_exact_charge() {
    let args = |observable: &'static str| {
        vec![
            "scan", "nariai", "--lambda", "1", "--phi2", "0.75", "--parameter", "q", "--lo", "0.38", "--hi", "0.48",
            "--steps", "10", "--observable", observable,
        ]
    };
    let out = bach3(&args("residual_max"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let best = rows
        .iter()
        .min_by(|a, b| a["value"].as_f64().unwrap().total_cmp(&b["value"].as_f64().unwrap()))
        .unwrap();
    let nearest = rows
        .iter()
        .min_by(|a, b| {
            let d = |v: &Value| (v["parameter"].as_f64().unwrap() - 0.1875f64.sqrt()).abs();
            d(a).total_cmp(&d(b))
        })
        .unwrap();
    assert_eq!(best["parameter"], nearest["parameter"]);

    let out = bach3(&args("cotton_norm"));
    let doc = stdout_json(&out);
    assert!(doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["value"].as_f64().unwrap() <= 1e-7));
}

#[test]
fn scan_exit_codes() {
    let base = ["scan", "ultracold", "--lambda", "0.25", "--parameter", "r", "--lo", "0.5", "--hi", "4"];
    let out = bach3(&[&base[..], &["--steps", "0"]].concat());
    assert_eq!(code(&out), 2);
    let out = bach3(&[
        "scan", "nariai", "--lambda", "1", "--phi2", "0.75", "--parameter", "q", "--lo", "2", "--hi", "3", "--steps",
        "2",
    ]);
    assert_eq!(code(&out), 1);
    let doc = stdout_json(&out);
    assert!(doc["rows"].as_array().unwrap().iter().all(|r| r["valid"] == false));
}

#[test]
fn warp_square_root_example() {
    let out = bach3(&["warp", "--profile", "linear", "--parameters", "1,0", "--c1", "1", "--c2", "0", "--interval", "1,4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    let warp = &doc["warp"];
    assert!(warp["ode_defect"].as_f64().unwrap() < 1e-12);
    for row in warp["rows"].as_array().unwrap() {
        let r = row["r"].as_f64().unwrap();
        assert!((row["phi"].as_f64().unwrap() - (2.0 * r.sqrt() - 2.0)).abs() < 1e-10);
        assert!(row["ricci_defect"].as_f64().unwrap() < 1e-7);
        assert!((row["fiber_scalar"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    }
}

#[test]
fn warp_from_spec_file_reports_critical_radii() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("warp.kv");
    std::fs::write(&path, "profile = sin\nparameters = 1, 1\nc1 = 0\nc2 = 1\ninterval = 0, 3.141592653589793\n").unwrap();
    let out = bach3(&["warp", "--spec", path.to_str().unwrap(), "--radial", "3", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 3);
    let error = header.iter().position(|h| h == "error").unwrap();
    assert!(rows[1][error].contains("critical"));
    assert!(rows[0][error].is_empty());

    let out = bach3(&["warp", "--profile", "sin", "--parameters", "1,1", "--c1", "0", "--c2", "1", "--interval", "0.5,4"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_bach3"))
            .args(["verify", "cold", "--lambda", "1", "--phi2", "0.4"])
            .env("BACH3_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(code(&one), 0);
    let four = run("4");
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&run("zero")), 2);
    assert_eq!(code(&run("0")), 2);
}
