//! End-to-end checks of the command-line interface: exit codes, schema
//! validity of the JSON output, and byte stability across runs.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_theta-cusps"))
        .args(args)
        .env("THETA_THREADS", "2")
        .output()
        .expect("binary runs")
}

#[test]
fn coeffs_json_schema_and_byte_stability() {
    let args = ["coeffs", "--cusp", "1/24", "--nmax", "25"];
    let out1 = run(&args);
    assert!(out1.status.success(), "{:?}", out1);
    let text = String::from_utf8(out1.stdout.clone()).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let tables = value.as_array().unwrap();
    assert_eq!(tables.len(), 1);
    theta_cusps::table::validate_table_json(&tables[0]).unwrap();
    // nonzero exactly at 1 and 25 for nu <= 25 at this cusp
    let rows = tables[0]["coefficients"].as_array().unwrap();
    assert_eq!(rows.len(), 26);
    for row in rows {
        let nu = row["nu"].as_u64().unwrap();
        let abs = row["abs"].as_f64().unwrap();
        if nu == 1 || nu == 25 {
            assert!((abs - 1.0).abs() < 1e-12, "nu={nu} abs={abs}");
        } else {
            assert!(abs < 1e-12, "nu={nu} abs={abs}");
        }
    }
    let out2 = run(&args);
    assert_eq!(out1.stdout, out2.stdout, "byte-stable output");
}

#[test]
fn coeffs_csv_format() {
    let out = run(&["coeffs", "--cusp", "inf", "--nmax", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("source,level,p,j,u,w,nu"));
    assert_eq!(lines.len(), 6); // header + nu = 0..4
    assert!(lines[2].contains("engine,576"));
}

#[test]
fn coeffs_rejects_unreduced_cusp() {
    let out = run(&["coeffs", "--cusp", "2/4", "--nmax", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("reduced"), "stderr: {err}");
}

#[test]
fn coeffs_rejects_oversized_range() {
    let out = run(&["coeffs", "--cusp", "inf", "--nmax", "500"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn five_twist_table_at_1_over_5() {
    let out = run(&["coeffs", "--p", "5", "--cusp", "1/5", "--nmax", "25"]);
    assert!(out.status.success());
    let value: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("valid json");
    let table = &value.as_array().unwrap()[0];
    theta_cusps::table::validate_table_json(table).unwrap();
    assert_eq!(table["twist"]["p"].as_u64(), Some(5));
    // 5 || w pattern: |A(1)| is a or b, |A(25)| is 2b or 2a
    let rows = table["coefficients"].as_array().unwrap();
    let abs1 = rows[1]["abs"].as_f64().unwrap();
    let abs25 = rows[25]["abs"].as_f64().unwrap();
    let (a, b) = (0.5257311121f64, 0.8506508083f64);
    let first = (abs1 - a).abs() < 1e-9 || (abs1 - b).abs() < 1e-9;
    let second = (abs25 - 2.0 * b).abs() < 1e-9 || (abs25 - 2.0 * a).abs() < 1e-9;
    assert!(first && second, "pattern at 1/5: |A(1)| = {abs1}, |A(25)| = {abs25}");
}

#[test]
fn matrix_dumps() {
    let out = run(&["matrix", "--p", "5", "--gen", "flip"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // B2 flip table [[-1,0,0],[0,0,1/sqrt5],[0,sqrt5,0]]
    assert_eq!(v["b2"][0][0]["coeffs"][0].as_str(), Some("-1"));
    assert!((v["b2"][2][1]["re"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);
    assert!((v["b2"][1][2]["re"].as_f64().unwrap() - 1.0 / 5f64.sqrt()).abs() < 1e-12);

    // xi_2(flip) = -(1+i)/sqrt2
    let out = run(&["matrix", "--p", "2", "--gen", "flip"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let re = v["value"]["re"].as_f64().unwrap();
    let im = v["value"]["im"].as_f64().unwrap();
    let s = 0.5f64.sqrt();
    assert!((re + s).abs() < 1e-12 && (im + s).abs() < 1e-12);

    // xi_3(diag(2, 1/2)) = chi_3(2) = -1
    let out = run(&["matrix", "--p", "3", "--gen", "diag", "--a", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"]["coeffs"][0].as_str(), Some("-1"));

    let out = run(&["matrix", "--p", "4", "--gen", "flip"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_sourced_table_matches_schema() {
    let out = run(&["coeffs", "--cusp", "1/24", "--nmax", "10", "--source", "oracle"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let table = &value.as_array().unwrap()[0];
    theta_cusps::table::validate_table_json(table).unwrap();
    assert_eq!(table["source"].as_str(), Some("oracle"));
    let rows = table["coefficients"].as_array().unwrap();
    assert!((rows[1]["abs"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn cusps_listing() {
    let out = run(&["cusps", "--level", "576"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["count"].as_u64(), Some(48));
}

#[test]
fn oracle_compare_small_grid() {
    let out = run(&[
        "oracle-compare",
        "--cusp",
        "1/24",
        "--nmax",
        "20",
        "--tol",
        "1e-6",
    ]);
    assert!(
        out.status.success(),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("max |engine - oracle|"));
    // an absurd tolerance must trip the exit-2 path
    let out = run(&[
        "oracle-compare",
        "--cusp",
        "1/24",
        "--nmax",
        "5",
        "--tol",
        "1e-18",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_gg_passes() {
    let out = run(&["verify-gg"]);
    assert!(
        out.status.success(),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("288 cusps"));
    assert!(text.contains("0 failures"));
}
